#include "relbif/bifurcation_branch.hpp"

#include <functional>
#include <optional>

namespace relbif {

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::PositiveDefinite: return "PositiveDefinite";
    case Stability::NegativeDefinite: return "NegativeDefinite";
    case Stability::Indefinite: return "Indefinite";
    case Stability::Degenerate: return "Degenerate";
    case Stability::NotComputed: break;
  }
  return "NotComputed";
}

Stability parse_stability(const std::string& s) {
  for (Stability c : {Stability::PositiveDefinite, Stability::NegativeDefinite, Stability::Indefinite,
                      Stability::Degenerate, Stability::NotComputed})
    if (s == stability_name(c)) return c;
  throw Error(ErrorCode::BadInput, "unknown stability class " + s);
}

SliceChart make_slice(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v0, const BetaFamily& fam,
                      const Numerics& num) {
  if (v0.size() != sys.n) throw Error(ErrorCode::DimensionMismatch, "v0 has wrong dimension");
  const Mat g = metric_at(sys.metric, sys.q_e);
  const double nv = k_norm(v0, g);
  if (nv == 0.0) throw Error(ErrorCode::BadInput, "v0 must be nonzero");
  const Vec v = v0 / nv;
  if (slice_residual(sys, v) > 1e-8) throw Error(ErrorCode::BadInput, "v0 is not orthogonal to g . q_e");
  if (isotropy_breaking(sys, an, v, num) <= 1e-8)
    throw Error(ErrorCode::TrivialIsotropyFailed, "v0 does not break the isotropy of q_e");
  if (ls_data(sys, an, v, fam, num).in_Z) throw Error(ErrorCode::InZMu, "v0 lies in the singular set Z_mu");

  SliceChart sl;
  sl.v0 = v;
  sl.orbit_tangents = Mat(sys.n, an.p());
  for (int a = 0; a < an.p(); ++a)
    sl.orbit_tangents.col(a) = generator_jacobian(sys, an.k0.col(a), sys.q_e, num.space_scheme) * v;
  const Mat X = generator_matrix(sys, sys.q_e);
  Mat excluded(sys.n, X.cols() + sl.orbit_tangents.cols());
  excluded << X, sl.orbit_tangents;
  Mat space(sys.n, sys.n + 1);
  space << v, Mat::Identity(sys.n, sys.n);
  sl.basis_U = complement_within(excluded, space, g, 1e-8);
  if (sl.basis_U.cols() == 0 || (sl.basis_U.col(0) - v).norm() > 1e-8)
    throw Error(ErrorCode::BadInput, "v0 is not orthogonal to the isotropy orbit through it");
  sl.basis_U.col(0) = v;
  sl.dim_U = static_cast<int>(sl.basis_U.cols());
  return sl;
}

double F0(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam) {
  const Vec m1 = an.P1 * fam.mu();
  return sys.potential(sys.q_e) + 0.5 * m1.dot(an.Ihat_inv * m1);
}

double F1(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
          double tau, const Vec& u, const Numerics& num) {
  const Vec v = slice.sigma(u);
  const Vec q = exp_at_qe(sys, tau * v, num, false);
  return sys.potential(q) + 0.5 * beta(fam, tau).dot(zeta(sys, an, fam, v, tau, num));
}

double F(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
         double tau, const Vec& u, const Numerics& num) {
  if (std::abs(tau) > num.tau_switch) return (F1(sys, an, fam, slice, tau, u, num) - F0(sys, an, fam)) / (tau * tau);
  const Vec v = slice.sigma(u);
  const Vec anchor = zeta_anchor(sys, an, fam, v, num);
  const double f0 = F0(sys, an, fam);
  auto c = local_poly(
      [&](double t) {
        const Vec q = exp_at_qe(sys, t * v, num, false);
        return sys.potential(q) + 0.5 * beta(fam, t).dot(zeta(sys, an, fam, v, t, num, &anchor)) - f0;
      },
      num.blowup_scheme.step_rel);
  return poly_eval(c, tau, 2);
}

namespace {

Mat slope_directions(const ChartSystem& sys, const SymmetryAnalysis& an, const SliceChart& slice, bool with_u,
                     bool with_g) {
  const Eigen::Index nu = with_u ? slice.dim_U : 0, ng = with_g ? an.k2.cols() : 0;
  Mat D(sys.n, nu + ng);
  if (with_u) D.leftCols(nu) = slice.basis_U;
  for (Eigen::Index j = 0; j < ng; ++j) D.col(nu + j) = sys.generator(an.k2.col(j), sys.q_e);
  return D;
}

// d/ds V_zeta(Exp(tau sigma(u) + s d)) at s = 0, zeta = zeta(tau) frozen, per column d.
Vec raw_slopes(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
               double tau, const Vec& u, const Mat& dirs, const Numerics& num, const Vec* anchor) {
  const Vec v = slice.sigma(u);
  const Vec z = zeta(sys, an, fam, v, tau, num, anchor);
  const Vec base = tau * v;
  const Vec q = exp_at_qe(sys, base, num, false);
  const Vec grad = d_augmented(sys, z, q, num.slope_scheme);
  Vec out(dirs.cols());
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
    if (sys.metric.constant) {
      out(j) = grad.dot(dirs.col(j));
      continue;
    }
    const Vec push = dir_derivative(
        [&](double s) { return exp_at_qe(sys, Vec(base + s * dirs.col(j)), num, false); }, 1,
        num.jacobian_scheme, 0.0);
    out(j) = grad.dot(push);
  }
  return out;
}

// Slopes divided by tau, continued smoothly through tau = 0.
Vec blown_slopes(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
                 double tau, const Vec& u, const Mat& dirs, const Numerics& num) {
  if (dirs.cols() == 0) return Vec(0);
  if (std::abs(tau) > num.tau_switch) return raw_slopes(sys, an, fam, slice, tau, u, dirs, num, nullptr) / tau;
  const Vec anchor = zeta_anchor(sys, an, fam, slice.sigma(u), num);
  auto c = local_poly([&](double t) { return raw_slopes(sys, an, fam, slice, t, u, dirs, num, &anchor); },
                      num.blowup_scheme.step_rel);
  return poly_eval(c, tau, 1);
}

}  // namespace

Vec dF_du(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
          double tau, const Vec& u, const Numerics& num) {
  return blown_slopes(sys, an, fam, slice, tau, u, slope_directions(sys, an, slice, true, false), num);
}

Vec G1(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
       double tau, const Vec& u, const Numerics& num) {
  const Mat dirs = slope_directions(sys, an, slice, false, true);
  if (dirs.cols() == 0) return Vec(0);
  const Vec v = slice.sigma(u);
  const Vec anchor = zeta_anchor(sys, an, fam, v, num);
  return raw_slopes(sys, an, fam, slice, tau, u, dirs, num, &anchor);
}

Vec G(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
      double tau, const Vec& u, const Numerics& num) {
  return blown_slopes(sys, an, fam, slice, tau, u, slope_directions(sys, an, slice, false, true), num);
}

BetaFamily with_mu2(const SymmetryAnalysis& an, const BetaFamily& fam, const Vec& c) {
  BetaFamily out = fam;
  out.mu2 = an.m2 * c;
  return out;
}

Vec mu2_coords(const SymmetryAnalysis& an, const Vec& mu2) { return an.k2.transpose() * mu2; }
Vec mu1_coords(const SymmetryAnalysis& an, const Vec& mu1) { return an.k1.transpose() * mu1; }

Vec bifurcation_map(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam,
                    const SliceChart& slice, double tau, const Vec& x, const Numerics& num) {
  const int nu = slice.dim_U;
  if (x.size() != nu + an.k2.cols()) throw Error(ErrorCode::DimensionMismatch, "unknowns have wrong size");
  const BetaFamily f = with_mu2(an, fam, x.tail(an.k2.cols()));
  return blown_slopes(sys, an, f, slice, tau, x.head(nu), slope_directions(sys, an, slice, true, true), num);
}

Mat delta_matrix(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
                 const Vec& u, const Vec& mu2c, const Numerics& num) {
  Vec x(u.size() + mu2c.size());
  x << u, mu2c;
  return fd_jacobian([&](const Vec& y) { return bifurcation_map(sys, an, fam, slice, 0.0, y, num); }, x,
                     num.jacobian_scheme);
}

namespace {

struct NewtonResult {
  bool ok = false;
  Vec x;
  double residual = INFINITY;
  int iterations = 0;
};

NewtonResult newton(const std::function<Vec(const Vec&)>& f, Vec x, const Numerics& num) {
  NewtonResult res;
  Vec r;
  try {
    r = f(x);
  } catch (const Error&) {
    return res;
  }
  if (!all_finite(r)) return res;
  for (int it = 0; it <= num.max_newton; ++it) {
    res.iterations = it;
    if (r.norm() <= num.tol_newton) {
      res.ok = true;
      res.x = x;
      res.residual = r.norm();
      return res;
    }
    if (it == num.max_newton) break;
    Vec dx;
    try {
      dx = fd_jacobian(f, x, num.newton_scheme).fullPivLu().solve(-r);
    } catch (const Error&) {
      return res;
    }
    if (!all_finite(dx)) return res;
    bool accepted = false;
    double lambda = 1.0;
    for (int k = 0; k < 12 && !accepted; ++k, lambda *= 0.5) {
      const Vec xn = x + lambda * dx;
      try {
        const Vec rn = f(xn);
        if (all_finite(rn) && rn.norm() < r.norm()) {
          x = xn;
          r = rn;
          accepted = true;
        }
      } catch (const Error&) {
      }
    }
    if (!accepted) break;
  }
  res.x = x;
  res.residual = r.norm();
  return res;
}

}  // namespace

Seed find_seed(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
               const Vec& u_guess, const Vec& mu2_guess, const Numerics& num) {
  if (u_guess.size() != slice.dim_U || mu2_guess.size() != an.k2.cols())
    throw Error(ErrorCode::DimensionMismatch, "seed guess has wrong size");
  const double scale = std::max(1.0, std::abs(F0(sys, an, fam)));
  Vec x(u_guess.size() + mu2_guess.size());
  x << u_guess, mu2_guess;
  auto f = [&](const Vec& y) { return Vec(bifurcation_map(sys, an, fam, slice, 0.0, y, num) / scale); };
  const NewtonResult nr = newton(f, x, num);
  if (!nr.ok) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "seed Newton failed after %d iterations (residual %.3g)", nr.iterations,
                  nr.residual);
    throw Error(ErrorCode::NewtonDiverged, buf);
  }
  Seed s;
  s.u = nr.x.head(slice.dim_U);
  s.mu2 = nr.x.tail(an.k2.cols());
  s.residual = nr.residual;
  s.iterations = nr.iterations;
  s.delta = delta_matrix(sys, an, fam, slice, s.u, s.mu2, num);
  s.delta_det = s.delta.determinant();
  if (std::abs(equilibrated_det(s.delta)) <= num.tol_Z)
    throw Error(ErrorCode::DeltaDegenerate, "seed found but the matrix Delta is degenerate");
  return s;
}

BranchPoint make_point(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam,
                       const SliceChart& slice, double tau, const Vec& x, const Numerics& num, const Vec* anchor) {
  const int nu = slice.dim_U;
  const BetaFamily f = with_mu2(an, fam, x.tail(an.k2.cols()));
  BranchPoint pt;
  pt.tau = tau;
  pt.u = x.head(nu);
  pt.mu1 = f.mu1;
  pt.mu2 = f.mu2;
  const Vec v = slice.sigma(pt.u);
  pt.q = exp_at_qe(sys, tau * v, num);
  pt.zeta = zeta(sys, an, f, v, tau, num, anchor);
  pt.beta_val = beta(f, tau);
  const double scale = std::max(1.0, std::abs(F0(sys, an, f)));
  const Vec r = bifurcation_map(sys, an, fam, slice, tau, x, num) / scale;
  pt.res_F = r.head(nu).norm();
  pt.res_G = r.tail(an.k2.cols()).norm();
  const Mat g = metric_at(sys.metric, pt.q);
  pt.min_generator = INFINITY;
  for (int a = 0; a < an.p(); ++a)
    pt.min_generator = std::min(pt.min_generator, k_norm(sys.generator(an.k0.col(a), pt.q), g));
  if (an.p() == 0) pt.min_generator = 0.0;
  if (tau != 0.0) {
    const Mat X = generator_matrix(sys, pt.q);
    Mat M(sys.n, X.cols() + nu);
    M << X, slice.basis_U;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const double nrm = k_norm(M.col(j), g);
      if (nrm > 0.0) M.col(j) /= nrm;
    }
    const Mat L = g.llt().matrixU();
    Eigen::JacobiSVD<Mat> svd(L * M);
    const Vec& s = svd.singularValues();
    pt.split_cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : INFINITY;
  }
  return pt;
}

Branch continue_branch(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam,
                       const SliceChart& slice, const Seed& seed, double tau_max, int n_steps,
                       const Numerics& num) {
  if (tau_max < 0.0 || n_steps < 0) throw Error(ErrorCode::BadInput, "tau_max and n_steps must be nonnegative");
  Branch br;
  br.fam = fam;
  br.seed = seed;
  Vec x0(seed.u.size() + seed.mu2.size());
  x0 << seed.u, seed.mu2;
  br.points.push_back(make_point(sys, an, fam, slice, 0.0, x0, num));
  if (tau_max == 0.0 || n_steps == 0) return br;

  const double min_step = tau_max / std::pow(2.0, num.min_step_pow);
  const double scale = std::max(1.0, std::abs(F0(sys, an, fam)));
  std::vector<std::pair<double, Vec>> hist{{0.0, x0}};
  auto solve_at = [&](double tau) -> std::optional<Vec> {
    Vec pred = hist.back().second;
    if (hist.size() >= 2) {
      const auto& a = hist[hist.size() - 2];
      const auto& b = hist.back();
      pred = b.second + (tau - b.first) / (b.first - a.first) * (b.second - a.second);
    }
    auto f = [&](const Vec& y) { return Vec(bifurcation_map(sys, an, fam, slice, tau, y, num) / scale); };
    NewtonResult nr = newton(f, pred, num);
    if (!nr.ok && hist.size() >= 2) nr = newton(f, hist.back().second, num);
    if (!nr.ok) return std::nullopt;
    return nr.x;
  };
  std::function<void(double, double)> advance = [&](double ta, double tb) {
    if (auto x = solve_at(tb)) {
      hist.emplace_back(tb, *x);
      br.points.push_back(make_point(sys, an, fam, slice, tb, *x, num));
      return;
    }
    if (tb - ta <= min_step * (1.0 + 1e-9)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "continuation failed at tau = %.17g", tb);
      throw Error(ErrorCode::StepFailed, buf);
    }
    const double mid = 0.5 * (ta + tb);
    advance(ta, mid);
    advance(mid, tb);
  };
  for (int k = 1; k <= n_steps; ++k) advance(tau_max * (k - 1) / n_steps, tau_max * k / n_steps);
  return br;
}

BranchVerification verify_branch(const ChartSystem& sys, const SymmetryAnalysis& an, const Branch& branch,
                                 double horizon, const Numerics& num, double tol_amended, double tol_dynamic) {
  BranchVerification rep;
  for (const BranchPoint& pt : branch.points) {
    for (Eigen::Index j = 0; j < an.torus.cols(); ++j)
      rep.max_isotropy_ad =
          std::max(rep.max_isotropy_ad, coadjoint_ad_star(sys.algebra, Vec(an.torus.col(j)), pt.beta_val).norm());
    if (pt.tau == 0.0) {
      rep.tau0_augmented = std::max(rep.tau0_augmented, d_augmented(sys, pt.zeta, pt.q, num.space_scheme).norm());
      continue;
    }
    // stencil shrinks with the distance to the symmetric point
    const double dist = (pt.q - sys.q_e).norm();
    const DiffScheme near{std::min(num.space_scheme.step_rel, 1e-2 * dist), 4, 2};
    const Vec dA = d_amended(sys, pt.beta_val, pt.q, num.tol_rank, near);
    const Mat g = metric_at(sys.metric, pt.q);
    const Mat Y = generator_matrix(sys, pt.q) * an.torus;
    Vec r = dA;
    if (Y.cols() > 0) r -= g * Y * (Y.transpose() * g * Y).ldlt().solve(Y.transpose() * dA);
    rep.max_amended = std::max(rep.max_amended, r.norm());
    if (sys.group_action && horizon > 0.0) {
      const DynamicCheck dc = dynamic_check_releq(sys, pt.q, pt.zeta, horizon, tol_dynamic, num);
      rep.dynamic_run = true;
      rep.max_deviation = std::max(rep.max_deviation, dc.max_deviation);
      rep.dynamic_ok = rep.dynamic_ok && dc.pass;
    }
  }
  rep.ok = rep.max_amended <= tol_amended && rep.tau0_augmented <= tol_amended && rep.dynamic_ok;
  return rep;
}

}  // namespace relbif
