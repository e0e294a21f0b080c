#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "relbif/splittings.hpp"
#include "relbif/systems_catalog.hpp"

using namespace relbif;

namespace {

void check_projection_identities(const SymmetryAnalysis& an) {
  const int d = an.dim();
  CHECK(an.k0.cols() + an.k1.cols() + an.k2.cols() == d);
  CHECK(max_abs(an.P_big * an.P_big - an.P_big) <= 1e-10);
  CHECK(max_abs(an.P1 * an.P1 - an.P1) <= 1e-10);
  CHECK(max_abs(an.P2 * an.P2 - an.P2) <= 1e-10);
  CHECK(max_abs(an.P1 + an.P2 - an.P_big) <= 1e-10);
  if (an.m1.cols()) CHECK(max_abs(an.P_big * an.m1 - an.m1) <= 1e-10);
  if (an.m2.cols()) CHECK(max_abs(an.P_big * an.m2 - an.m2) <= 1e-10);
  if (an.m0.cols()) CHECK(max_abs(an.P_big * an.m0) <= 1e-10);
  // m_i annihilates k_j for i != j
  const Mat* k[3] = {&an.k0, &an.k1, &an.k2};
  const Mat* m[3] = {&an.m0, &an.m1, &an.m2};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j && m[i]->cols() && k[j]->cols()) CHECK(max_abs(m[i]->transpose() * *k[j]) <= 1e-10);
  const Mat kb = an.k();
  if (kb.cols()) CHECK(max_abs(an.Ihat_inv * an.P_big * an.I_qe * kb - kb) <= 1e-10);
  if (an.k1.cols()) CHECK(subspace_distance(an.Kinv * an.m1, an.Kinv * an.I_qe * an.k1, an.K) <= 1e-8);
  if (an.k2.cols()) CHECK(subspace_distance(an.Kinv * an.m2, an.Kinv * an.I_qe * an.k2, an.K) <= 1e-8);
  CHECK(max_abs(an.I_qe * an.k0) <= 1e-10);
  // k0 + k1 spans the torus
  Mat t(d, an.k0.cols() + an.k1.cols());
  t << an.k0, an.k1;
  CHECK(subspace_distance(t, an.torus, an.K) <= 1e-10);
}

}  // namespace

TEST_CASE("planar rotor at the origin") {
  const SymmetryAnalysis an = analyze_symmetry(make_system("planar_rotor"));
  CHECK(an.p() == 1);
  CHECK(an.k1.cols() == 0);
  CHECK(an.k2.cols() == 0);
  CHECK(an.m0.cols() == 1);
  CHECK(max_abs(an.P_big) == 0.0);
  CHECK(max_abs(an.P1) == 0.0);
  check_projection_identities(an);
}

TEST_CASE("flat torus system") {
  const double a = 1.5;
  const SymmetryAnalysis an = analyze_symmetry(make_system("flat_t2", {{"a", a}, {"chart_radius", 1.0}}));
  CHECK(an.p() == 1);
  CHECK(an.k1.cols() == 1);
  CHECK(an.k2.cols() == 0);
  CHECK(an.m1.cols() == 1);
  CHECK(std::abs(std::abs(an.k0(1, 0)) - 1.0) <= 1e-12);
  CHECK(std::abs(an.I_qe(0, 0) - a * a) <= 1e-12);
  check_projection_identities(an);
}

TEST_CASE("so(3) central force") {
  const SymmetryAnalysis an = analyze_symmetry(make_system("so3_central_force"));
  CHECK(an.p() == 1);
  CHECK(an.k1.cols() == 0);
  CHECK(an.k2.cols() == 2);
  CHECK(an.m2.cols() == 2);
  CHECK(std::abs(std::abs(an.k0(2, 0)) - 1.0) <= 1e-12);
  check_projection_identities(an);
}

TEST_CASE("projection identities on every catalog system") {
  for (const auto& e : catalog()) {
    CAPTURE(e.name);
    const SymmetryAnalysis an = analyze_symmetry(make_system(e.name));
    check_projection_identities(an);
    CHECK(an.spectral_gap() > 1e6);
  }
}

TEST_CASE("isotropy outside the torus is rejected") {
  ChartSystem sys = make_system("so3_central_force");
  sys.q_e = Vec::Zero(3);
  sys.q_e(0) = 1.0;  // isotropy span{e1}, not in span{e3}
  try {
    analyze_symmetry(sys);
    FAIL("expected IsotropyNotInTorus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IsotropyNotInTorus);
  }
}

TEST_CASE("hypothesis (H)") {
  for (const char* name : {"spherical_pendulum", "planar_rotor", "so3_two_particle"}) {
    CAPTURE(name);
    const ChartSystem sys = make_system(name);
    const HypothesisReport h = check_hypothesis_H(sys, analyze_symmetry(sys));
    CHECK(h.pass);
    CHECK(h.residual <= 1e-8);
  }
  ChartSystem tilted = make_system("spherical_pendulum");
  tilted.potential = [](const Vec& w) { return -std::cos(w.norm()) + 0.3 * w.squaredNorm() * w.squaredNorm() + 0.1 * w(0); };
  CHECK_FALSE(check_hypothesis_H(tilted, analyze_symmetry(tilted)).pass);
}

TEST_CASE("Montaldi conditions") {
  SUBCASE("abelian systems have no pairing condition") {
    const ChartSystem sys = make_system("flat_t2");
    const SymmetryAnalysis an = analyze_symmetry(sys);
    const MontaldiReport m = check_montaldi(sys, an);
    CHECK(m.pass);
    CHECK(m.torus_pairing == 0.0);
  }
  SUBCASE("perturbed base point fails with the radial force") {
    ChartSystem sys = make_system("so3_central_force", {{"kappa", 2.0}});
    sys.q_e(2) = 1.1;
    const MontaldiReport m = check_montaldi(sys, analyze_symmetry(sys));
    CHECK_FALSE(m.pass);
    CHECK(std::abs(m.grad_V - 2.0 * 0.1) <= 1e-8);
    CHECK(m.torus_pairing <= 1e-12);
  }
}
