#include "relbif/stability.hpp"

namespace relbif {

Mat hessian_F_U(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
                double tau, const Vec& u, const Numerics& num) {
  if (an.k2.cols() > 0) throw Error(ErrorCode::NonAbelian, "second variation is only available for abelian groups");
  const Mat H = fd_jacobian([&](const Vec& w) { return dF_du(sys, an, fam, slice, tau, w, num); }, u,
                            num.jacobian_scheme);
  return 0.5 * (H + H.transpose());
}

Stability classify_definiteness(const Mat& M, double tol_eig) {
  if (M.rows() == 0) return Stability::Degenerate;
  const Mat S = 0.5 * (M + M.transpose());
  const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(S, Eigen::EigenvaluesOnly).eigenvalues();
  const double tol = tol_eig * std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.cwiseAbs().minCoeff() <= tol) return Stability::Degenerate;
  if (ev.minCoeff() > tol) return Stability::PositiveDefinite;
  if (ev.maxCoeff() < -tol) return Stability::NegativeDefinite;
  return Stability::Indefinite;
}

void branch_stability(const ChartSystem& sys, const SymmetryAnalysis& an, const SliceChart& slice, Branch& branch,
                      const Numerics& num) {
  if (an.k2.cols() > 0) throw Error(ErrorCode::NonAbelian, "stability classification requires an abelian group");
  branch.first_change_tau = -1.0;
  for (BranchPoint& pt : branch.points) {
    pt.stability = classify_definiteness(hessian_F_U(sys, an, branch.fam, slice, pt.tau, pt.u, num), num.tol_eig);
  }
  if (branch.points.empty()) return;
  const Stability s0 = branch.points.front().stability;
  branch.tau0_positive = s0 == Stability::PositiveDefinite;
  for (const BranchPoint& pt : branch.points)
    if (pt.stability != s0) {
      branch.first_change_tau = pt.tau;
      break;
    }
}

PatrickReport patrick_check(const ChartSystem& sys, const Vec& q, const Vec& mu, const Numerics& num) {
  const LieAlgebraSpec& alg = sys.algebra;
  const int d = alg.dim;
  PatrickReport rep;
  Mat C(d, d);  // eta -> ad*_eta mu
  for (int j = 0; j < d; ++j) C.col(j) = coadjoint_ad_star(alg, Vec(Mat::Identity(d, d).col(j)), mu);
  rep.g_mu = max_abs(C) == 0.0 ? Mat(Mat::Identity(d, d)) : nullspace(C, num.tol_rank);

  const Mat I = locked_inertia(sys, q);
  Eigen::SelfAdjointEigenSolver<Mat> es(I, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= num.tol_rank * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw Error(ErrorCode::SymmetricPoint, "locked inertia is singular at q");

  const Mat g = metric_at(sys.metric, q);
  const Mat orbit = generator_matrix(sys, q) * rep.g_mu;
  rep.complement = orth_complement(orbit, g, 1e-10);
  // covariant Hessian d^2 V_mu - Gamma . dV_mu on the complement
  const Vec grad = d_amended(sys, mu, q, num.tol_rank, num.space_scheme);
  const Christoffel gam = christoffel(sys.metric, q, num.metric_scheme);
  const Eigen::Index m = rep.complement.cols();
  rep.hessian = Mat(m, m);
  auto second = [&](const Vec& w) {
    return dir_derivative([&](double t) { return amended_potential(sys, mu, Vec(q + t * w), 0.0); }, 2,
                          num.jacobian_scheme, 0.0);
  };
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a; b < m; ++b) {
      const Vec wa = rep.complement.col(a), wb = rep.complement.col(b);
      double hab;
      if (a == b) {
        hab = second(wa);
      } else {
        hab = 0.25 * (second(Vec(wa + wb)) - second(Vec(wa - wb)));
      }
      // Christoffel term -Gamma^k_ab dV_k
      Vec gab(sys.n);
      for (int k = 0; k < sys.n; ++k) gab(k) = wa.dot(gam[k] * wb);
      hab -= grad.dot(gab);
      rep.hessian(a, b) = rep.hessian(b, a) = hab;
    }
  rep.stability = classify_definiteness(rep.hessian, num.tol_eig);
  return rep;
}

}  // namespace relbif
