#pragma once

#include "relbif/bifurcation_branch.hpp"

namespace relbif {

Mat hessian_F_U(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const SliceChart& slice,
                double tau, const Vec& u, const Numerics& num = {});

// Eigenvalue thresholds are tol_eig * max(1, |M|).
Stability classify_definiteness(const Mat& M, double tol_eig = 1e-8);

// Sets the stability class of every point; records the tau = 0 class and the
// first tau where the class departs from it.
void branch_stability(const ChartSystem& sys, const SymmetryAnalysis& an, const SliceChart& slice, Branch& branch,
                      const Numerics& num = {});

struct PatrickReport {
  Mat g_mu;        // basis of the coadjoint isotropy algebra of mu
  Mat complement;  // g(q)-orthonormal basis of the complement of g_mu . q
  Mat hessian;     // d^2 V_mu restricted to the complement
  Stability stability = Stability::NotComputed;
};
PatrickReport patrick_check(const ChartSystem& sys, const Vec& q, const Vec& mu, const Numerics& num = {});

}  // namespace relbif
