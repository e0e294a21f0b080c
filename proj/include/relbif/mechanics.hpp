#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "relbif/chart_geometry.hpp"
#include "relbif/lie_core.hpp"
#include "relbif/numerics.hpp"

namespace relbif {

// Simple mechanical G-system written in one chart around q_e.
struct ChartSystem {
  std::string name;
  int n = 0;
  MetricField metric;
  std::function<double(const Vec&)> potential;
  std::function<Vec(const Vec& xi, const Vec& q)> generator;     // xi_Q(q), linear in xi
  LieAlgebraSpec algebra;
  Vec q_e;
  double chart_radius = 1.0;
  std::function<Vec(const Vec& xi, const Vec& q)> group_action;  // exp(xi) . q, optional
  Mat declared_isotropy;                                         // optional, columns in g
  std::function<bool(const Vec&)> coordinates_valid;             // optional, for dynamics; default: chart ball

  ChartDomain domain() const { return ChartDomain{q_e, chart_radius}; }
  int dim_g() const { return algebra.dim; }
};

GeoOptions geo_options(const ChartSystem& sys, const Numerics& num, const ChartDomain* dom);
// check_error = false skips the step-doubling estimate (inner stencils).
Vec exp_at_qe(const ChartSystem& sys, const Vec& v, const Numerics& num = {}, bool check_error = true);

Mat generator_matrix(const ChartSystem& sys, const Vec& q);
Mat generator_jacobian(const ChartSystem& sys, const Vec& xi, const Vec& q, const DiffScheme& scheme);
Mat locked_inertia(const ChartSystem& sys, const Vec& q);
Vec momentum(const ChartSystem& sys, const Vec& q, const Vec& v);

Vec potential_gradient(const ChartSystem& sys, const Vec& q, const DiffScheme& scheme);
// T_q I (w) = d/ds I(q + s w) at s = 0.
Mat inertia_derivative(const ChartSystem& sys, const Vec& q, const Vec& w, const DiffScheme& scheme);

double augmented_potential(const ChartSystem& sys, const Vec& xi, const Vec& q);
Vec d_augmented(const ChartSystem& sys, const Vec& xi, const Vec& q, const DiffScheme& scheme = {1e-3, 4, 0});

double amended_potential(const ChartSystem& sys, const Vec& mu, const Vec& q, double tol_rank = 1e-8);
Vec d_amended(const ChartSystem& sys, const Vec& mu, const Vec& q, double tol_rank = 1e-8,
              const DiffScheme& scheme = {1e-3, 4, 0});

struct SystemCheck {
  double linearity = 0.0;
  double potential_invariance = 0.0;
  double metric_invariance = 0.0;
  bool ok = false;
};
SystemCheck check_system(const ChartSystem& sys, int samples = 10, std::uint64_t seed = 7,
                         const Numerics& num = {});

struct IdentityReport {
  int samples = 0;
  double useful_identity = 0.0;        // d<I xi, eta>(zeta_Q) against the bracket form
  double infinitesimal_equivariance = 0.0;
  double finite_equivariance = 0.0;    // only with a group action
  double generator_relation = 0.0;     // only with a group action
  bool has_group_action = false;
  double max_residual() const;
};
IdentityReport verify_identities(const ChartSystem& sys, int samples, std::uint64_t seed = 11,
                                 const Numerics& num = {});

// Random chart point within `fraction` of the chart radius around q_e.
Vec random_point(const ChartSystem& sys, std::mt19937_64& rng, double fraction = 0.5);
Vec random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0);

struct DynamicCheck {
  double max_deviation = 0.0;
  bool pass = false;
};
DynamicCheck dynamic_check_releq(const ChartSystem& sys, const Vec& q, const Vec& xi, double horizon, double tol,
                                 const Numerics& num = {}, int steps_per_checkpoint = 128);
bool dynamic_verify_releq(const ChartSystem& sys, const Vec& q, const Vec& xi, double horizon, double tol,
                          const Numerics& num = {});

}  // namespace relbif
