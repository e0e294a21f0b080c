#pragma once

#include <cmath>
#include <limits>

namespace relbif {

// Central-difference scheme: base stencil of accuracy `order` (2 or 4),
// refined by `richardson_levels` halvings of the step.
struct DiffScheme {
  double step_rel = 6.0554544523933395e-06;
  int order = 2;
  int richardson_levels = 2;

  static DiffScheme first() {
    return {std::cbrt(std::numeric_limits<double>::epsilon()), 2, 2};
  }
  static DiffScheme second() {
    return {std::pow(std::numeric_limits<double>::epsilon(), 0.25), 2, 2};
  }
};

struct Numerics {
  double tol_alg = 1e-10;
  double tol_rank = 1e-8;
  double tol_geo = 1e-10;
  int geo_steps = 64;
  double tol_inv = 1e-8;
  double tol_H = 1e-8;
  double tol_Z = 1e-10;
  double tau_switch = 1e-3;
  double tol_match = 1e-7;
  double tol_newton = 1e-10;
  int max_newton = 50;
  int n_steps = 64;
  int min_step_pow = 10;
  double tol_eig = 1e-8;
  int n_small = 8;
  // stencils for nested derivatives (metric, potential, blow-up in tau)
  DiffScheme metric_scheme{1e-3, 4, 0};
  DiffScheme space_scheme{1e-3, 4, 0};
  DiffScheme blowup_scheme{1e-2, 2, 2};
  DiffScheme jacobian_scheme{1e-3, 4, 0};
  DiffScheme newton_scheme{1e-3, 2, 0};   // Newton iteration matrix only
  DiffScheme slope_scheme{1e-2, 4, 2};  // first variation of V_zeta along the slice
};

}  // namespace relbif
