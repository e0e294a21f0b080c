#include "relbif/splittings.hpp"

namespace relbif {

Mat SymmetryAnalysis::k() const {
  Mat out(dim(), k1.cols() + k2.cols());
  out << k1, k2;
  return out;
}

SymmetryAnalysis analyze_symmetry(const ChartSystem& sys, const Numerics& num) {
  const LieAlgebraSpec& alg = sys.algebra;
  const int d = alg.dim;
  SymmetryAnalysis an;
  an.q_e = sys.q_e;
  an.I_qe = locked_inertia(sys, sys.q_e);
  an.K = alg.inner;
  an.Kinv = alg.inner.inverse();

  Eigen::JacobiSVD<Mat> svd(an.I_qe, Eigen::ComputeFullV);
  an.singular_values = svd.singularValues();
  const double smax = an.singular_values.size() ? an.singular_values(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < an.singular_values.size(); ++i)
    if (an.singular_values(i) > num.tol_rank * smax && smax > 0.0) ++r;
  an.range_sigma = r > 0 ? an.singular_values(r - 1) : 0.0;
  an.kernel_sigma = r < d ? an.singular_values(r) : 0.0;
  an.k0 = orthonormalize(svd.matrixV().rightCols(d - r), an.K);

  const TorusSplit split = split_torus_complement(alg, num.tol_rank);
  an.torus = split.torus;
  const Mat Pt = k_projector(an.torus, an.K);
  for (Eigen::Index j = 0; j < an.k0.cols(); ++j)
    if (k_norm(an.k0.col(j) - Pt * an.k0.col(j), an.K) > 1e-6)
      throw Error(ErrorCode::IsotropyNotInTorus, "kernel of the locked inertia at q_e leaves the torus algebra");
  an.k1 = complement_within(an.k0, an.torus, an.K);
  an.k2 = split.complement;
  if (an.k0.cols() + an.k1.cols() + an.k2.cols() != d)
    throw Error(ErrorCode::DimensionMismatch, "splitting dimensions do not add up");

  an.m0 = an.K * an.k0;
  an.m1 = an.K * an.k1;
  an.m2 = an.K * an.k2;
  an.P1 = an.K * an.k1 * an.k1.transpose();
  an.P2 = an.K * an.k2 * an.k2.transpose();

  const Mat kb = an.k();
  if (kb.cols() > 0) {
    const Mat S = kb.transpose() * an.I_qe * kb;
    an.Ihat_inv = kb * S.ldlt().solve(kb.transpose());
    an.Ihat_inv = 0.5 * (an.Ihat_inv + an.Ihat_inv.transpose()).eval();
  } else {
    an.Ihat_inv = Mat::Zero(d, d);
  }
  an.P_big = an.I_qe * an.Ihat_inv;

  if (sys.declared_isotropy.size() > 0)
    an.isotropy_mismatch = subspace_distance(an.k0, sys.declared_isotropy, an.K);
  return an;
}

HypothesisReport check_hypothesis_H(const ChartSystem& sys, const SymmetryAnalysis& an, const Numerics& num,
                                    std::uint64_t seed) {
  HypothesisReport rep;
  std::mt19937_64 rng(seed);
  std::vector<Vec> probes;
  for (Eigen::Index j = 0; j < an.torus.cols(); ++j) probes.push_back(an.torus.col(j));
  for (int i = 0; i < 3 && an.torus.cols() > 0; ++i)
    probes.push_back(an.torus * random_vector(an.torus.cols(), rng));
  if (probes.empty()) probes.push_back(Vec::Zero(an.dim()));
  for (const Vec& xi : probes)
    rep.residual = std::max(rep.residual, d_augmented(sys, xi, sys.q_e, num.space_scheme).norm());
  rep.pass = rep.residual <= num.tol_H;
  return rep;
}

MontaldiReport check_montaldi(const ChartSystem& sys, const SymmetryAnalysis& an, const Numerics& num) {
  MontaldiReport rep;
  rep.grad_V = potential_gradient(sys, sys.q_e, num.space_scheme).norm();
  if (an.k2.cols() > 0 && an.torus.cols() > 0)
    rep.torus_pairing = max_abs(an.k2.transpose() * an.I_qe * an.torus);
  rep.pass = rep.grad_V <= num.tol_H && rep.torus_pairing <= num.tol_H;
  return rep;
}

}  // namespace relbif
