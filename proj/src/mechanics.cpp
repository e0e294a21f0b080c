#include "relbif/mechanics.hpp"

#include <algorithm>

namespace relbif {

GeoOptions geo_options(const ChartSystem& sys, const Numerics& num, const ChartDomain* dom) {
  (void)sys;
  GeoOptions opt;
  opt.steps = num.geo_steps;
  opt.tol = num.tol_geo;
  opt.scheme = num.metric_scheme;
  opt.domain = dom;
  return opt;
}

Vec exp_at_qe(const ChartSystem& sys, const Vec& v, const Numerics& num, bool check_error) {
  const ChartDomain dom = sys.domain();
  GeoOptions opt = geo_options(sys, num, &dom);
  opt.check_error = check_error;
  return riemannian_exp(sys.metric, sys.q_e, v, opt);
}

Mat generator_matrix(const ChartSystem& sys, const Vec& q) {
  const int d = sys.dim_g();
  Mat X(q.size(), d);
  const Mat I = Mat::Identity(d, d);
  for (int a = 0; a < d; ++a) X.col(a) = sys.generator(I.col(a), q);
  return X;
}

Mat generator_jacobian(const ChartSystem& sys, const Vec& xi, const Vec& q, const DiffScheme& scheme) {
  Mat J(q.size(), q.size());
  for (Eigen::Index l = 0; l < q.size(); ++l)
    J.col(l) = dir_derivative(
        [&](double t) {
          Vec p = q;
          p(l) += t;
          return sys.generator(xi, p);
        },
        1, scheme, 0.0);
  return J;
}

Mat locked_inertia(const ChartSystem& sys, const Vec& q) {
  const Mat X = generator_matrix(sys, q);
  const Mat I = X.transpose() * metric_at(sys.metric, q) * X;
  return 0.5 * (I + I.transpose());
}

Vec momentum(const ChartSystem& sys, const Vec& q, const Vec& v) {
  return generator_matrix(sys, q).transpose() * (metric_at(sys.metric, q) * v);
}

Vec potential_gradient(const ChartSystem& sys, const Vec& q, const DiffScheme& scheme) {
  Vec g(q.size());
  for (Eigen::Index l = 0; l < q.size(); ++l)
    g(l) = dir_derivative(
        [&](double t) {
          Vec p = q;
          p(l) += t;
          return sys.potential(p);
        },
        1, scheme, 0.0);
  return g;
}

Mat inertia_derivative(const ChartSystem& sys, const Vec& q, const Vec& w, const DiffScheme& scheme) {
  return dir_derivative([&](double t) { return locked_inertia(sys, Vec(q + t * w)); }, 1, scheme, 0.0);
}

double augmented_potential(const ChartSystem& sys, const Vec& xi, const Vec& q) {
  return sys.potential(q) - 0.5 * xi.dot(locked_inertia(sys, q) * xi);
}

Vec d_augmented(const ChartSystem& sys, const Vec& xi, const Vec& q, const DiffScheme& scheme) {
  Vec g(q.size());
  for (Eigen::Index l = 0; l < q.size(); ++l)
    g(l) = dir_derivative(
        [&](double t) {
          Vec p = q;
          p(l) += t;
          return augmented_potential(sys, xi, p);
        },
        1, scheme, 0.0);
  return g;
}

double amended_potential(const ChartSystem& sys, const Vec& mu, const Vec& q, double tol_rank) {
  const Mat I = locked_inertia(sys, q);
  Eigen::SelfAdjointEigenSolver<Mat> es(I);
  const Vec& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (top == 0.0 || ev(0) <= tol_rank * top)
    throw Error(ErrorCode::SymmetricPoint, "locked inertia tensor is singular");
  return sys.potential(q) + 0.5 * mu.dot(I.ldlt().solve(mu));
}

Vec d_amended(const ChartSystem& sys, const Vec& mu, const Vec& q, double tol_rank, const DiffScheme& scheme) {
  amended_potential(sys, mu, q, tol_rank);
  Vec g(q.size());
  for (Eigen::Index l = 0; l < q.size(); ++l)
    g(l) = dir_derivative(
        [&](double t) {
          Vec p = q;
          p(l) += t;
          return amended_potential(sys, mu, p, 0.0);
        },
        1, scheme, 0.0);
  return g;
}

Vec random_vector(Eigen::Index n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * u(rng);
  return v;
}

Vec random_point(const ChartSystem& sys, std::mt19937_64& rng, double fraction) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec dir = random_vector(sys.n, rng);
  while (dir.norm() == 0.0) dir = random_vector(sys.n, rng);
  const double r = std::isfinite(sys.chart_radius) ? fraction * sys.chart_radius * u(rng) : fraction * u(rng);
  return sys.q_e + r * dir.normalized();
}

SystemCheck check_system(const ChartSystem& sys, int samples, std::uint64_t seed, const Numerics& num) {
  SystemCheck r;
  std::mt19937_64 rng(seed);
  const DiffScheme& sch = num.space_scheme;
  for (int s = 0; s < samples; ++s) {
    const Vec q = random_point(sys, rng);
    const Vec xi = random_vector(sys.dim_g(), rng), eta = random_vector(sys.dim_g(), rng);
    r.linearity = std::max(
        r.linearity,
        (sys.generator(Vec(xi + eta), q) - sys.generator(xi, q) - sys.generator(eta, q)).cwiseAbs().maxCoeff());
    const Vec X = sys.generator(xi, q);
    r.potential_invariance = std::max(
        r.potential_invariance,
        std::abs(dir_derivative([&](double t) { return sys.potential(Vec(q + t * X)); }, 1, sch, 0.0)));
    const Mat g = metric_at(sys.metric, q);
    const Mat dgX = dir_derivative([&](double t) { return metric_at(sys.metric, Vec(q + t * X)); }, 1, sch, 0.0);
    const Mat DX = generator_jacobian(sys, xi, q, sch);
    r.metric_invariance = std::max(r.metric_invariance, max_abs(dgX + DX.transpose() * g + g * DX));
  }
  r.ok = r.linearity <= 1e-10 && r.potential_invariance <= num.tol_inv && r.metric_invariance <= num.tol_inv;
  return r;
}

double IdentityReport::max_residual() const {
  return std::max(std::max(useful_identity, infinitesimal_equivariance),
                  std::max(finite_equivariance, generator_relation));
}

IdentityReport verify_identities(const ChartSystem& sys, int samples, std::uint64_t seed, const Numerics& num) {
  IdentityReport r;
  r.samples = samples;
  r.has_group_action = static_cast<bool>(sys.group_action);
  std::mt19937_64 rng(seed);
  const LieAlgebraSpec& alg = sys.algebra;
  const DiffScheme& sch = num.space_scheme;
  const int d = sys.dim_g();
  for (int s = 0; s < samples; ++s) {
    const Vec q = random_point(sys, rng);
    const Vec xi = random_vector(d, rng), eta = random_vector(d, rng), zeta = random_vector(d, rng);
    const Mat I = locked_inertia(sys, q);
    const Vec zq = sys.generator(zeta, q);
    const double lhs =
        dir_derivative([&](double t) { return eta.dot(locked_inertia(sys, Vec(q + t * zq)) * xi); }, 1, sch, 0.0);
    const double rhs = eta.dot(I * bracket(alg, xi, zeta)) + bracket(alg, eta, zeta).dot(I * xi);
    r.useful_identity = std::max(r.useful_identity, std::abs(lhs - rhs));

    const Mat ad = ad_matrix(alg, xi);
    const Mat dI = inertia_derivative(sys, q, sys.generator(xi, q), sch);
    r.infinitesimal_equivariance =
        std::max(r.infinitesimal_equivariance, max_abs(dI + ad.transpose() * I + I * ad));

    if (r.has_group_action) {
      const Vec chi = random_vector(d, rng, 0.5);
      const Mat E = adjoint_exp(alg, Vec(-chi));
      const Vec gq = sys.group_action(chi, q);
      r.finite_equivariance =
          std::max(r.finite_equivariance, max_abs(locked_inertia(sys, gq) - E.transpose() * I * E));
      const Vec p = sys.group_action(Vec(-chi), q);
      const Vec w = sys.generator(xi, p);
      const Vec pushed =
          dir_derivative([&](double t) { return sys.group_action(chi, Vec(p + t * w)); }, 1, sch, 0.0);
      const Vec lhs_gen = sys.generator(Vec(adjoint_exp(alg, chi) * xi), q);
      r.generator_relation = std::max(r.generator_relation, (lhs_gen - pushed).cwiseAbs().maxCoeff());
    }
  }
  return r;
}

DynamicCheck dynamic_check_releq(const ChartSystem& sys, const Vec& q, const Vec& xi, double horizon, double tol,
                                 const Numerics& num, int steps_per_checkpoint) {
  if (!sys.group_action) throw Error(ErrorCode::NoGroupAction, "dynamic check needs a group action");
  const ChartDomain dom = sys.domain();
  auto acc = [&](const Vec& x, const Vec& p) -> Vec {
    if (!x.allFinite()) throw Error(ErrorCode::NonFinite, "trajectory is not finite");
    if (!(sys.coordinates_valid ? sys.coordinates_valid(x) : dom.contains(x)))
      throw Error(ErrorCode::LeftChart, "trajectory left the chart");
    const Vec force = metric_at(sys.metric, x).ldlt().solve(potential_gradient(sys, x, num.space_scheme));
    return Vec(-contract(christoffel(sys.metric, x, num.metric_scheme), p) - force);
  };
  Vec x = q, p = sys.generator(xi, q);
  const int checkpoints = 16;
  const double h = horizon / (checkpoints * steps_per_checkpoint);
  DynamicCheck r;
  for (int c = 1; c <= checkpoints; ++c) {
    for (int i = 0; i < steps_per_checkpoint; ++i) {
      const Vec k1x = p, k1p = acc(x, p);
      const Vec k2x = p + 0.5 * h * k1p, k2p = acc(x + 0.5 * h * k1x, k2x);
      const Vec k3x = p + 0.5 * h * k2p, k3p = acc(x + 0.5 * h * k2x, k3x);
      const Vec k4x = p + h * k3p, k4p = acc(x + h * k3x, k4x);
      x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    const double t = horizon * c / checkpoints;
    const Vec expected = sys.group_action(Vec(t * xi), q);
    r.max_deviation = std::max(r.max_deviation, (x - expected).norm());
  }
  r.pass = r.max_deviation <= tol;
  return r;
}

bool dynamic_verify_releq(const ChartSystem& sys, const Vec& q, const Vec& xi, double horizon, double tol,
                          const Numerics& num) {
  return dynamic_check_releq(sys, q, xi, horizon, tol, num).pass;
}

}  // namespace relbif
