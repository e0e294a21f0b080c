#pragma once

#include "relbif/splittings.hpp"

namespace relbif {

// Momentum family beta(tau, mu) = P1 mu + tau P2 mu + tau^2 theta1, all in g* coordinates.
struct BetaFamily {
  Vec mu1;     // in m1
  Vec mu2;     // in m2
  Vec theta1;  // in m0, nonzero
  Vec mu() const { return mu1 + mu2; }
};

BetaFamily make_family(const SymmetryAnalysis& an, const Vec& mu1, const Vec& mu2, const Vec& theta1,
                       double tol = 1e-10);
Vec beta(const BetaFamily& fam, double tau);
Vec eta_mu(const SymmetryAnalysis& an, const BetaFamily& fam);

// Taylor jet of tau -> I(Exp_{q_e}(tau v)) at 0: I0, I1 = dI/dtau, I2 = d^2I/dtau^2.
struct InertiaJet {
  Mat I0, I1, I2;
};
InertiaJet inertia_jet(const ChartSystem& sys, const Vec& v, const Numerics& num = {});

struct LSData {
  Vec v;
  Vec eta_mu;
  Mat A;
  Vec Bvec;
  Vec xi0;
  double detA = 0.0;
  bool in_Z = true;
};

Mat assemble_A(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v, const Numerics& num = {});
Vec assemble_B(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v, const BetaFamily& fam,
               const Numerics& num = {});
// Determinant of A after row equilibration.
double equilibrated_det(const Mat& A);
Vec solve_xi0(const SymmetryAnalysis& an, const Mat& A, const Vec& Bvec, const Numerics& num = {});
// Full Step-2 data; in_Z set instead of throwing.
LSData ls_data(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v, const BetaFamily& fam,
               const Numerics& num = {});

// Residual of v against (g . q_e)^perp in the metric at q_e.
double slice_residual(const ChartSystem& sys, const Vec& v);
// Smallest singular value of [D X_{xi_a}(q_e) v] over the k0 basis, relative to |v|.
double isotropy_breaking(const ChartSystem& sys, const SymmetryAnalysis& an, const Vec& v, const Numerics& num = {});

// Jacobi-scaled full-pivot solve of I(q) zeta = b.
Vec solve_inertia(const Mat& I, const Vec& b);
Vec zeta_direct(const ChartSystem& sys, const BetaFamily& fam, const Vec& v, double tau, const Numerics& num = {});
// Smooth velocity extension; the anchor zeta(0) = xi0 + eta_mu may be passed to skip recomputation.
Vec zeta(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const Vec& v, double tau,
         const Numerics& num = {}, const Vec* anchor = nullptr);
Vec zeta_anchor(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const Vec& v,
                const Numerics& num = {});

// phi(tau, v, mu, xi) = I(Exp(tau v))(xi + eta) - beta(tau), with eta in k solving the Step-1 equation.
Vec phi(const ChartSystem& sys, const SymmetryAnalysis& an, const BetaFamily& fam, const Vec& v, double tau,
        const Vec& xi, const Numerics& num = {});

}  // namespace relbif
