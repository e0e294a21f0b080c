#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "relbif/mechanics.hpp"
#include "relbif/systems_catalog.hpp"

using namespace relbif;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v1(double a) { return (Vec(1) << a).finished(); }

}  // namespace

TEST_CASE("planar rotor locked inertia") {
  const ChartSystem rotor = make_system("planar_rotor");
  CHECK(locked_inertia(rotor, v2(1, 0))(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(locked_inertia(rotor, v2(2, 0))(0, 0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(locked_inertia(rotor, v2(0, 0))(0, 0) == 0.0);
}

TEST_CASE("kernel of the locked inertia is the isotropy algebra") {
  const ChartSystem sys = make_system("so3_central_force");
  std::mt19937_64 rng(21);
  for (int s = 0; s < 10; ++s) {
    const Vec q = random_point(sys, rng);
    const Mat I = locked_inertia(sys, q);
    const Mat ker = nullspace(I, 1e-8);
    REQUIRE(ker.cols() == 1);
    CHECK(subspace_distance(ker, q, Mat::Identity(3, 3)) <= 1e-10);
    CHECK(generator_matrix(sys, q).col(0).size() == 3);
    CHECK(sys.generator(Vec(ker.col(0)), q).norm() <= 1e-12);
  }
}

TEST_CASE("momentum map") {
  const ChartSystem rotor = make_system("planar_rotor");
  CHECK(momentum(rotor, v2(1, 0), v2(0, 1))(0) == doctest::Approx(1.0));
  CHECK(momentum(rotor, v2(1, 0), v2(0, 0)).norm() == 0.0);
  const ChartSystem sys = make_system("so3_two_particle");
  std::mt19937_64 rng(5);
  for (int s = 0; s < 10; ++s) {
    const Vec q = random_point(sys, rng), xi = random_vector(3, rng);
    const Vec J = momentum(sys, q, sys.generator(xi, q));
    CHECK((J - locked_inertia(sys, q) * xi).norm() <= 1e-12 * std::max(1.0, J.norm()));
  }
}

TEST_CASE("augmented potential") {
  const ChartSystem rotor = make_system("planar_rotor");
  const Vec q = v2(1.7, 0);
  CHECK(augmented_potential(rotor, v1(0), q) == doctest::Approx(rotor.potential(q)));
  const double r = 1.7, w = 0.6;
  CHECK(augmented_potential(rotor, v1(w), q) == doctest::Approx(0.5 * r * r - 0.5 * w * w * r * r).epsilon(1e-14));
  CHECK(d_augmented(rotor, v1(1.0), v2(1.3, 0)).norm() <= 1e-10);
  CHECK(d_augmented(rotor, v1(0.5), v2(1.3, 0)).norm() > 0.1);
}

TEST_CASE("amended potential") {
  const ChartSystem rotor = make_system("planar_rotor");
  const double r = 1.4;
  CHECK(amended_potential(rotor, v1(1), v2(r, 0)) == doctest::Approx(0.5 * r * r + 0.5 / (r * r)).epsilon(1e-14));
  CHECK(d_amended(rotor, v1(1), v2(1, 0)).norm() <= 1e-9);
  CHECK(std::abs(d_amended(rotor, v1(1), v2(r, 0))(0) - (r - 1.0 / (r * r * r))) <= 1e-8);
  try {
    amended_potential(rotor, v1(1), v2(0, 0));
    FAIL("expected SymmetricPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SymmetricPoint);
  }
}

TEST_CASE("identity suite on the catalog") {
  for (const CatalogEntry& entry : catalog()) {
    CAPTURE(entry.name);
    const ChartSystem sys = make_system(entry.name);
    const SystemCheck sc = check_system(sys);
    CHECK(sc.ok);
    const IdentityReport r = verify_identities(sys, 50);
    CHECK(r.samples >= 50);
    CHECK(r.useful_identity <= 1e-7);
    CHECK(r.infinitesimal_equivariance <= 1e-7);
    CHECK(r.has_group_action);
    CHECK(r.finite_equivariance <= 1e-7);
  }
  CHECK(verify_identities(make_system("planar_rotor"), 50).useful_identity <= 1e-8);
}

TEST_CASE("check_system flags a non-invariant potential") {
  ChartSystem rotor = make_system("planar_rotor");
  rotor.potential = [](const Vec& q) { return q(0); };
  CHECK_FALSE(check_system(rotor).ok);
}

TEST_CASE("relative equilibrium dynamics") {
  const ChartSystem rotor = make_system("planar_rotor");
  CHECK(dynamic_verify_releq(rotor, v2(1, 0), v1(1.0), 10.0, 1e-4));
  CHECK(dynamic_verify_releq(rotor, v2(0, 0), v1(0.0), 10.0, 1e-4));
  CHECK_FALSE(dynamic_verify_releq(rotor, v2(1, 0), v1(2.0), 10.0, 1e-4));
}

TEST_CASE("exponential at q_e respects the chart") {
  const ChartSystem pend = make_system("spherical_pendulum");
  const Vec x = exp_at_qe(pend, v2(0.3, -0.4));
  CHECK((x - v2(0.3, -0.4)).norm() <= 1e-9);
  CHECK_THROWS_AS(exp_at_qe(pend, v2(3.0, 0.0)), Error);
}
