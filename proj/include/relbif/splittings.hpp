#pragma once

#include <cstdint>

#include "relbif/mechanics.hpp"

namespace relbif {

// Data fixed at q_e: isotropy, the splittings g = k0+k1+k2, g* = m0+m1+m2 and
// the projections built on them. Primal bases are K-orthonormal, dual bases
// are K^{-1}-orthonormal (m_i = K k_i).
struct SymmetryAnalysis {
  Vec q_e;
  Mat I_qe;
  Mat K, Kinv;
  Mat torus;
  Mat k0, k1, k2;
  Mat m0, m1, m2;
  Mat P_big;     // onto I(q_e) g along m0
  Mat P1, P2;    // onto m1 (resp. m2) along the other two
  Mat Ihat_inv;  // I(q_e) k -> k, extended by zero on m0
  Vec singular_values;  // of I(q_e), descending
  double kernel_sigma = 0.0;  // largest singular value classified as kernel
  double range_sigma = 0.0;   // smallest singular value classified as range
  double isotropy_mismatch = 0.0;  // principal-angle sine against declared isotropy

  int dim() const { return static_cast<int>(K.rows()); }
  int p() const { return static_cast<int>(k0.cols()); }
  Mat k() const;  // [k1 k2]
  double spectral_gap() const { return kernel_sigma > 0.0 ? range_sigma / kernel_sigma : INFINITY; }
};

SymmetryAnalysis analyze_symmetry(const ChartSystem& sys, const Numerics& num = {});

struct HypothesisReport {
  double residual = 0.0;
  bool pass = false;
};
HypothesisReport check_hypothesis_H(const ChartSystem& sys, const SymmetryAnalysis& an,
                                    const Numerics& num = {}, std::uint64_t seed = 5);

struct MontaldiReport {
  double grad_V = 0.0;
  double torus_pairing = 0.0;
  bool pass = false;
};
MontaldiReport check_montaldi(const ChartSystem& sys, const SymmetryAnalysis& an, const Numerics& num = {});

}  // namespace relbif
