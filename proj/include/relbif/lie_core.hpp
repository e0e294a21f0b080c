#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "relbif/errors.hpp"
#include "relbif/linalg.hpp"

namespace relbif {

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Lie algebra in a fixed basis: [e_i, e_j] = sum_k c[k](i, j) e_k.
template <typename Scalar>
struct BasicLieAlgebra {
  int dim = 0;
  std::vector<MatX<Scalar>> c;
  MatX<Scalar> inner;  // ad-invariant inner product
  MatX<Scalar> torus;  // columns span the maximal torus algebra

  bool abelian() const {
    for (const auto& ck : c)
      if (ck.cwiseAbs().maxCoeff() != Scalar(0)) return false;
    return true;
  }
};
using LieAlgebraSpec = BasicLieAlgebra<double>;

template <typename Scalar>
BasicLieAlgebra<Scalar> make_abelian(int dim) {
  BasicLieAlgebra<Scalar> a;
  a.dim = dim;
  a.c.assign(dim, MatX<Scalar>::Zero(dim, dim));
  a.inner = MatX<Scalar>::Identity(dim, dim);
  a.torus = MatX<Scalar>::Identity(dim, dim);
  return a;
}

// so(3) with [e1,e2]=e3 and cyclic; inner product is -1/2 Killing, torus = span{e3}.
template <typename Scalar>
BasicLieAlgebra<Scalar> make_so3() {
  BasicLieAlgebra<Scalar> a;
  a.dim = 3;
  a.c.assign(3, MatX<Scalar>::Zero(3, 3));
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    a.c[k](i, j) = Scalar(1);
    a.c[k](j, i) = Scalar(-1);
  }
  a.inner = MatX<Scalar>::Identity(3, 3);
  a.torus = MatX<Scalar>::Zero(3, 1);
  a.torus(2, 0) = Scalar(1);
  return a;
}

template <typename Scalar>
void check_conform(const BasicLieAlgebra<Scalar>& alg, Eigen::Index n, const char* what) {
  if (n != alg.dim) throw Error(ErrorCode::DimensionMismatch, std::string(what) + " does not match dim g");
}

// Matrix of ad_x: (ad_x)(k, j) = sum_i c[k](i, j) x_i.
template <typename Scalar, typename Derived>
MatX<Scalar> ad_matrix(const BasicLieAlgebra<Scalar>& alg, const Eigen::MatrixBase<Derived>& x) {
  check_conform(alg, x.size(), "x");
  MatX<Scalar> m(alg.dim, alg.dim);
  for (int k = 0; k < alg.dim; ++k) m.row(k) = x.transpose() * alg.c[k];
  return m;
}

template <typename Scalar, typename DX, typename DY>
VecX<Scalar> bracket(const BasicLieAlgebra<Scalar>& alg, const Eigen::MatrixBase<DX>& x,
                     const Eigen::MatrixBase<DY>& y) {
  check_conform(alg, y.size(), "y");
  return ad_matrix(alg, x) * y;
}

// <ad*_x m, y> = <m, [x, y]>, i.e. the transpose of ad_x in dual coordinates.
template <typename Scalar, typename DX, typename DM>
VecX<Scalar> coadjoint_ad_star(const BasicLieAlgebra<Scalar>& alg, const Eigen::MatrixBase<DX>& x,
                               const Eigen::MatrixBase<DM>& m) {
  check_conform(alg, m.size(), "m");
  return ad_matrix(alg, x).transpose() * m;
}

// Ad_{exp x} = exp(ad_x).
template <typename DX>
Mat adjoint_exp(const LieAlgebraSpec& alg, const Eigen::MatrixBase<DX>& x) {
  return ad_matrix(alg, x).exp();
}

struct LieValidation {
  double antisymmetry = 0.0;
  double jacobi = 0.0;
  double invariance = 0.0;
  double torus_commutator = 0.0;
  int torus_rank = 0;
  bool ok = false;
};

inline LieValidation validate_algebra(const LieAlgebraSpec& alg, double tol_alg = 1e-10) {
  LieValidation r;
  const int d = alg.dim;
  if (d <= 0 || static_cast<int>(alg.c.size()) != d || alg.inner.rows() != d || alg.inner.cols() != d ||
      alg.torus.rows() != d)
    throw Error(ErrorCode::DimensionMismatch, "malformed Lie algebra data");
  for (int k = 0; k < d; ++k) {
    if (alg.c[k].rows() != d || alg.c[k].cols() != d)
      throw Error(ErrorCode::DimensionMismatch, "structure constant block has wrong shape");
    r.antisymmetry = std::max(r.antisymmetry, max_abs(alg.c[k] + alg.c[k].transpose()));
  }
  const Mat I = Mat::Identity(d, d);
  std::vector<Mat> ad(d);
  for (int i = 0; i < d; ++i) ad[i] = ad_matrix(alg, I.col(i));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        Vec x = I.col(i), y = I.col(j), z = I.col(k);
        Vec jac = bracket(alg, bracket(alg, x, y), z) + bracket(alg, bracket(alg, y, z), x) +
                  bracket(alg, bracket(alg, z, x), y);
        r.jacobi = std::max(r.jacobi, jac.cwiseAbs().maxCoeff());
      }
  for (int z = 0; z < d; ++z)
    r.invariance = std::max(r.invariance, max_abs(ad[z].transpose() * alg.inner + alg.inner * ad[z]));
  r.torus_rank = numerical_rank(alg.torus, 1e-10);
  for (Eigen::Index a = 0; a < alg.torus.cols(); ++a)
    for (Eigen::Index b = 0; b < alg.torus.cols(); ++b)
      r.torus_commutator = std::max(
          r.torus_commutator, bracket(alg, alg.torus.col(a), alg.torus.col(b)).cwiseAbs().maxCoeff());
  const bool spd = Eigen::LLT<Mat>(alg.inner).info() == Eigen::Success &&
                   max_abs(alg.inner - alg.inner.transpose()) <= tol_alg;
  r.ok = spd && r.antisymmetry <= tol_alg && r.jacobi <= tol_alg && r.invariance <= tol_alg &&
         r.torus_commutator <= tol_alg && r.torus_rank == alg.torus.cols();
  return r;
}

struct TorusSplit {
  Mat torus;       // orthonormal basis of t
  Mat complement;  // orthonormal basis of [g, t]
};

inline TorusSplit split_torus_complement(const LieAlgebraSpec& alg, double tol_rank = 1e-8) {
  const int d = alg.dim;
  TorusSplit s;
  s.torus = orthonormalize(alg.torus, alg.inner);
  Mat spans(d, d * s.torus.cols());
  for (int i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < s.torus.cols(); ++j)
      spans.col(i * s.torus.cols() + j) = bracket(alg, Vec(Mat::Identity(d, d).col(i)), s.torus.col(j));
  if (spans.cols() == 0 || spans.cwiseAbs().maxCoeff() == 0.0) {
    s.complement = Mat(d, 0);
    return s;
  }
  Eigen::JacobiSVD<Mat> svd(spans, Eigen::ComputeThinU);
  const int r = numerical_rank(spans, tol_rank);
  s.complement = orthonormalize(svd.matrixU().leftCols(r), alg.inner);
  return s;
}

inline double torus_residual(const LieAlgebraSpec& alg, const Vec& x) {
  Mat t = orthonormalize(alg.torus, alg.inner);
  return k_norm(x - k_projector(t, alg.inner) * x, alg.inner);
}

inline bool is_regular(const LieAlgebraSpec& alg, const Vec& x, double tol_rank = 1e-8,
                       double tol_alg = 1e-10) {
  check_conform(alg, x.size(), "x");
  if (torus_residual(alg, x) > tol_alg * std::max(1.0, k_norm(x, alg.inner)))
    throw Error(ErrorCode::NotInTorus, "element is not in the torus algebra");
  const int want = alg.dim - static_cast<int>(alg.torus.cols());
  return numerical_rank(ad_matrix(alg, x), tol_rank) == want;
}

}  // namespace relbif
