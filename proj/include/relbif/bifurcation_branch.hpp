#pragma once

#include <string>
#include <vector>

#include "relbif/ls_reduction.hpp"

namespace relbif {

enum class Stability { NotComputed, PositiveDefinite, NegativeDefinite, Indefinite, Degenerate };
const char* stability_name(Stability s);
Stability parse_stability(const std::string& s);

// Linear slice sigma(u) = basis_U u through v0 = basis_U.col(0); orthonormal in g(q_e).
struct SliceChart {
  Vec v0;
  Mat basis_U;
  Mat orbit_tangents;  // linearized k0-orbit through v0
  int dim_U = 0;
  Vec sigma(const Vec& u) const { return basis_U * u; }
};

SliceChart make_slice(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v0, const BetaFamily& fam,
                      const Numerics& num = {});

double F0(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam);
double F1(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
          double tau, const Vec& u, const Numerics& num = {});
double F(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
         double tau, const Vec& u, const Numerics& num = {});
Vec dF_du(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
          double tau, const Vec& u, const Numerics& num = {});
Vec G1(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
       double tau, const Vec& u, const Numerics& num = {});
Vec G(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
      double tau, const Vec& u, const Numerics& num = {});

// Unknowns x = (u, c) with mu2 = m2 c; returns (dF/du, G) at (tau, u, mu1 + mu2), unscaled.
Vec bifurcation_map(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam,
                    const SliceChart& slice, double tau, const Vec& x, const Numerics& num = {});
BetaFamily with_mu2(const SymmetryAnalysis& an, const BetaFamily& fam, const Vec& c);
Vec mu2_coords(const SymmetryAnalysis& an, const Vec& mu2);
Vec mu1_coords(const SymmetryAnalysis& an, const Vec& mu1);

template <typename Fn>
Mat fd_jacobian(Fn&& f, const Vec& x, const DiffScheme& scheme) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    J.col(j) = dir_derivative(
        [&](double t) {
          Vec y = x;
          y(j) += t;
          return Vec(f(y));
        },
        1, scheme, 0.0);
  return J;
}

Mat delta_matrix(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
                 const Vec& u, const Vec& mu2c, const Numerics& num = {});

struct Seed {
  Vec u;
  Vec mu2;  // m2 coordinates
  Mat delta;
  double delta_det = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

Seed find_seed(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
               const Vec& u_guess, const Vec& mu2_guess, const Numerics& num = {});

struct BranchPoint {
  double tau = 0.0;
  Vec u, mu1, mu2;  // mu1, mu2 full covectors
  Vec q, zeta, beta_val;
  double res_F = 0.0, res_G = 0.0;
  Stability stability = Stability::NotComputed;
  double min_generator = 0.0;  // smallest |xi_Q(q)| over the k0 basis
  double split_cond = 0.0;     // condition of [normalized generators, slice directions] at q
};

struct Branch {
  std::vector<BranchPoint> points;
  BetaFamily fam;
  Seed seed;
  bool tau0_positive = false;
  double first_change_tau = -1.0;  // first tau where the stability class differs from tau = 0
};

BranchPoint make_point(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam,
                       const SliceChart& slice, double tau, const Vec& x, const Numerics& num = {},
                       const Vec* anchor = nullptr);

Branch continue_branch(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam,
                       const SliceChart& slice, const Seed& seed, double tau_max, int n_steps,
                       const Numerics& num = {});

struct BranchVerification {
  double max_amended = 0.0;      // tau > 0 points, off the torus orbit
  double tau0_augmented = 0.0;   // augmented criterion with zeta(0) at q_e
  double max_deviation = 0.0;    // dynamic check
  bool dynamic_ok = true;
  bool dynamic_run = false;
  double max_isotropy_ad = 0.0;  // |ad*_t beta| along the branch
  bool ok = false;
};
BranchVerification verify_branch(const ChartSystem& sys, const SymmetryAnalysis& an, const Branch& branch,
                                 double horizon, const Numerics& num = {}, double tol_amended = 1e-6,
                                 double tol_dynamic = 1e-4);

}  // namespace relbif
