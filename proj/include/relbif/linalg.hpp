#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace relbif {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline int numerical_rank(const Mat& M, double tol_rel) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(M);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol_rel * s(0)) ++r;
  return r;
}

// Columns spanning ker M (Euclidean-orthonormal), rank cut at tol_rel * sigma_max.
inline Mat nullspace(const Mat& M, double tol_rel) {
  const Eigen::Index n = M.cols();
  if (M.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  int r = 0;
  if (s.size() > 0 && s(0) > 0.0)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > tol_rel * s(0)) ++r;
  return svd.matrixV().rightCols(n - r);
}

inline double k_norm(const Vec& x, const Mat& K) { return std::sqrt(std::max(0.0, x.dot(K * x))); }

// Modified Gram-Schmidt in the inner product K, two sweeps; columns whose
// residual falls below tol times their original length are dropped.
inline Mat orthonormalize(const Mat& cols, const Mat& K, double tol = 1e-10) {
  const Eigen::Index n = cols.rows();
  Mat out(n, 0);
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    Vec v = cols.col(j);
    const double n0 = k_norm(v, K);
    if (n0 == 0.0) continue;
    for (int sweep = 0; sweep < 2; ++sweep)
      for (Eigen::Index i = 0; i < out.cols(); ++i) v -= out.col(i).dot(K * v) * out.col(i);
    const double n1 = k_norm(v, K);
    if (n1 <= tol * n0) continue;
    out.conservativeResize(n, out.cols() + 1);
    out.col(out.cols() - 1) = v / n1;
  }
  return out;
}

// K-orthonormal basis of the K-orthogonal complement of span(B) in R^n.
inline Mat orth_complement(const Mat& B, const Mat& K, double tol_rel = 1e-10) {
  const Eigen::Index n = K.rows();
  if (B.cols() == 0) return orthonormalize(Mat::Identity(n, n), K, tol_rel);
  Mat N = nullspace((B.transpose() * K).eval(), tol_rel);
  return orthonormalize(N, K, tol_rel);
}

// K-orthonormal basis of the part of span(space) K-orthogonal to span(sub).
inline Mat complement_within(const Mat& sub, const Mat& space, const Mat& K, double tol = 1e-10) {
  Mat joined(space.rows(), sub.cols() + space.cols());
  joined << sub, space;
  Mat on = orthonormalize(joined, K, tol);
  Mat s = orthonormalize(sub, K, tol);
  return on.rightCols(on.cols() - s.cols());
}

// K-orthogonal projector onto span(Q) for K-orthonormal Q.
inline Mat k_projector(const Mat& Q, const Mat& K) { return Q * Q.transpose() * K; }

// Sine of the largest principal angle between span(A) and span(B) in the K product.
inline double subspace_distance(const Mat& A, const Mat& B, const Mat& K, double tol = 1e-10) {
  Mat a = orthonormalize(A, K, tol), b = orthonormalize(B, K, tol);
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  double worst = 0.0;
  const Mat Pb = k_projector(b, K), Pa = k_projector(a, K);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    worst = std::max(worst, k_norm(a.col(j) - Pb * a.col(j), K));
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    worst = std::max(worst, k_norm(b.col(j) - Pa * b.col(j), K));
  return worst;
}

inline double max_abs(const Mat& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace relbif
