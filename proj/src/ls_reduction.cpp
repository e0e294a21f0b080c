#include "relbif/ls_reduction.hpp"

namespace relbif {

namespace {

void require_in(const Mat& P, const Vec& x, double tol, const char* what) {
  if ((x - P * x).norm() > tol * std::max(1.0, x.norm()))
    throw Error(ErrorCode::BadInput, std::string(what) + " does not lie in its subspace");
}

}  // namespace

BetaFamily make_family(const SymmetryAnalysis& an, const Vec& mu1, const Vec& mu2, const Vec& theta1, double tol) {
  const int d = an.dim();
  if (mu1.size() != d || mu2.size() != d || theta1.size() != d)
    throw Error(ErrorCode::DimensionMismatch, "momentum family components must have dim g entries");
  require_in(an.P1, mu1, tol, "mu1");
  require_in(an.P2, mu2, tol, "mu2");
  const Mat P0 = an.K * an.k0 * an.k0.transpose();
  require_in(P0, theta1, tol, "theta1");
  if (theta1.norm() == 0.0) throw Error(ErrorCode::BadInput, "theta1 must be nonzero");
  return BetaFamily{mu1, mu2, theta1};
}

Vec beta(const BetaFamily& fam, double tau) { return fam.mu1 + tau * fam.mu2 + tau * tau * fam.theta1; }

Vec eta_mu(const SymmetryAnalysis& an, const BetaFamily& fam) { return an.Ihat_inv * (an.P1 * fam.mu()); }

InertiaJet inertia_jet(const ChartSystem& sys, const Vec& v, const Numerics& num) {
  InertiaJet jet;
  jet.I0 = locked_inertia(sys, sys.q_e);
  const int d = sys.dim_g();
  if (v.norm() == 0.0) {
    jet.I1 = jet.I2 = Mat::Zero(d, d);
    return jet;
  }
  const double h = num.blowup_scheme.step_rel / std::max(1.0, v.norm());
  auto c = local_poly([&](double t) { return locked_inertia(sys, exp_at_qe(sys, t * v, num, false)); }, h);
  jet.I1 = c[1];
  jet.I2 = 2.0 * c[2];
  return jet;
}

double slice_residual(const ChartSystem& sys, const Vec& v) {
  const Mat X = generator_matrix(sys, sys.q_e);
  if (X.cols() == 0 || X.norm() == 0.0) return 0.0;
  const Mat g = metric_at(sys.metric, sys.q_e);
  return (X.transpose() * g * v).norm() / (X.norm() * std::max(1.0, v.norm()));
}

double isotropy_breaking(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v, const Numerics& num) {
  if (an.p() == 0) return INFINITY;
  Mat M(sys.n, an.p());
  for (int a = 0; a < an.p(); ++a) M.col(a) = generator_jacobian(sys, an.k0.col(a), sys.q_e, num.space_scheme) * v;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(svd.singularValues().size() - 1) / std::max(v.norm(), 1e-300);
}

static void check_direction(const ChartSystem& sys, const Vec& v) {
  if (v.size() != sys.n) throw Error(ErrorCode::DimensionMismatch, "direction has wrong dimension");
  if (slice_residual(sys, v) > 1e-8) throw Error(ErrorCode::BadInput, "direction is not orthogonal to g . q_e");
}

static Mat A_from_jet(const SymmetryAnalysis& an, const InertiaJet& jet) {
  const Mat core = jet.I2 - 2.0 * jet.I1 * an.Ihat_inv * jet.I1;
  return an.k0.transpose() * core * an.k0;
}

static Vec B_from_jet(const SymmetryAnalysis& an, const InertiaJet& jet, const BetaFamily& fam) {
  const Mat core = jet.I2 - 2.0 * jet.I1 * an.Ihat_inv * jet.I1;
  const Vec eta0 = eta_mu(an, fam);
  const Vec mu = fam.mu();
  const Vec w = core * eta0 + 2.0 * jet.I1 * an.Ihat_inv * (an.P2 * mu) - 2.0 * fam.theta1;
  return an.k0.transpose() * w;
}

Mat assemble_A(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v, const Numerics& num) {
  check_direction(sys, v);
  return A_from_jet(an, inertia_jet(sys, v, num));
}

Vec assemble_B(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v, const BetaFamily& fam,
               const Numerics& num) {
  check_direction(sys, v);
  return B_from_jet(an, inertia_jet(sys, v, num), fam);
}

double equilibrated_det(const Mat& A) {
  if (A.rows() == 0) return 1.0;
  Mat E = A;
  for (Eigen::Index i = 0; i < E.rows(); ++i) {
    const double s = E.row(i).cwiseAbs().maxCoeff();
    if (s == 0.0) return 0.0;
    E.row(i) /= s;
  }
  return E.determinant();
}

Vec solve_xi0(const SymmetryAnalysis& an, const Mat& A, const Vec& Bvec, const Numerics& num) {
  if (A.rows() != an.p() || Bvec.size() != an.p())
    throw Error(ErrorCode::DimensionMismatch, "A and B must match dim k0");
  if (an.p() == 0) return Vec::Zero(an.dim());
  if (std::abs(equilibrated_det(A)) <= num.tol_Z)
    throw Error(ErrorCode::InZMu, "direction lies in the singular set Z_mu");
  const Vec alpha = A.fullPivLu().solve(-Bvec);
  return an.k0 * alpha;
}

LSData ls_data(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v, const BetaFamily& fam,
               const Numerics& num) {
  check_direction(sys, v);
  LSData out;
  out.v = v;
  out.eta_mu = eta_mu(an, fam);
  const InertiaJet jet = inertia_jet(sys, v, num);
  out.A = A_from_jet(an, jet);
  out.Bvec = B_from_jet(an, jet, fam);
  out.detA = equilibrated_det(out.A);
  out.in_Z = std::abs(out.detA) <= num.tol_Z;
  out.xi0 = out.in_Z ? Vec(Vec::Zero(an.dim())) : solve_xi0(an, out.A, out.Bvec, num);
  return out;
}

Vec solve_inertia(const Mat& I, const Vec& b) {
  const Eigen::Index d = I.rows();
  Vec D(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double s = std::abs(I(i, i));
    D(i) = s > 0.0 ? 1.0 / std::sqrt(s) : 1.0;
  }
  const Mat S = D.asDiagonal() * I * D.asDiagonal();
  Eigen::FullPivLU<Mat> lu(S);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularInertia, "locked inertia is singular");
  const Vec z = D.asDiagonal() * lu.solve(Vec(D.asDiagonal() * b));
  if (!all_finite(z)) throw Error(ErrorCode::SingularInertia, "locked inertia solve is not finite");
  return z;
}

Vec zeta_direct(const ChartSystem& sys, const BetaFamily& fam, const Vec& v, double tau, const Numerics& num) {
  const Vec q = exp_at_qe(sys, tau * v, num, false);
  return solve_inertia(locked_inertia(sys, q), beta(fam, tau));
}

Vec zeta_anchor(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const Vec& v,
                const Numerics& num) {
  const LSData ls = ls_data(sys, an, v, fam, num);
  if (ls.in_Z) throw Error(ErrorCode::InZMu, "direction lies in the singular set Z_mu");
  return ls.xi0 + ls.eta_mu;
}

Vec zeta(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const Vec& v, double tau,
         const Numerics& num, const Vec* anchor) {
  if (std::abs(tau) > num.tau_switch) return zeta_direct(sys, fam, v, tau, num);
  const Vec z0 = anchor ? *anchor : zeta_anchor(sys, an, fam, v, num);
  if (tau == 0.0) return z0;
  auto c = local_poly(
      [&](double t) { return t == 0.0 ? z0 : zeta_direct(sys, fam, v, t, num); }, num.tau_switch);
  return poly_eval(c, tau);
}

Vec phi(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const Vec& v, double tau,
        const Vec& xi, const Numerics& num) {
  const Mat I = locked_inertia(sys, exp_at_qe(sys, tau * v, num));
  const Vec b = beta(fam, tau);
  const Mat kb = an.k();
  Vec eta = Vec::Zero(an.dim());
  if (kb.cols() > 0) {
    const Mat S = kb.transpose() * I * kb;
    eta = kb * S.fullPivLu().solve(Vec(kb.transpose() * (b - I * xi)));
  }
  return I * (xi + eta) - b;
}

}  // namespace relbif
