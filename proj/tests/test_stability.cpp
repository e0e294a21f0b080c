#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "relbif/stability.hpp"
#include "relbif/systems_catalog.hpp"

using namespace relbif;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v1(double a) { return (Vec(1) << a).finished(); }

struct Setup {
  ChartSystem sys;
  SymmetryAnalysis an;
  BetaFamily fam;
  SliceChart slice;
  Setup(ChartSystem s, const Vec& v0) : sys(std::move(s)), an(analyze_symmetry(sys)) {
    fam = make_family(an, Vec::Zero(an.dim()), Vec::Zero(an.dim()), an.m0.col(0));
    slice = make_slice(sys, an, v0, fam);
  }
};

}  // namespace

TEST_CASE("definiteness classes") {
  CHECK(classify_definiteness(Mat::Identity(3, 3)) == Stability::PositiveDefinite);
  CHECK(classify_definiteness(Mat((Vec(2) << 1, -1).finished().asDiagonal())) == Stability::Indefinite);
  CHECK(classify_definiteness(Mat::Constant(1, 1, 4.0)) == Stability::PositiveDefinite);
  CHECK(classify_definiteness(-Mat::Identity(2, 2)) == Stability::NegativeDefinite);
  CHECK(classify_definiteness(Mat((Vec(2) << 1, 1e-12).finished().asDiagonal())) == Stability::Degenerate);
}

TEST_CASE("rotor Hessian") {
  const Setup r(make_system("planar_rotor"), v2(1, 0));
  CHECK(std::abs(hessian_F_U(r.sys, r.an, r.fam, r.slice, 0.0, v1(1.0))(0, 0) - 4.0) <= 1e-6);
  CHECK(std::abs(hessian_F_U(r.sys, r.an, r.fam, r.slice, 0.2, v1(1.0))(0, 0) - 4.0) <= 1e-6);
  const Seed s = find_seed(r.sys, r.an, r.fam, r.slice, v1(1.0), Vec());
  Branch b = continue_branch(r.sys, r.an, r.fam, r.slice, s, 0.4, 8);
  branch_stability(r.sys, r.an, r.slice, b);
  for (const auto& p : b.points) CHECK(p.stability == Stability::PositiveDefinite);
  CHECK(b.tau0_positive);
  CHECK(b.first_change_tau < 0.0);
  // the same classification through the amended potential at the middle of the branch
  const BranchPoint& mid = b.points[4];
  const PatrickReport pr = patrick_check(r.sys, mid.q, mid.beta_val);
  CHECK(pr.stability == mid.stability);
}

TEST_CASE("Patrick check on the rotor") {
  const ChartSystem rotor = make_system("planar_rotor");
  const PatrickReport pr = patrick_check(rotor, v2(1, 0), v1(1.0));
  CHECK(pr.g_mu.cols() == 1);  // abelian: g_mu = g
  REQUIRE(pr.hessian.rows() == 1);
  CHECK(std::abs(pr.hessian(0, 0) - 4.0) <= 1e-6);
  CHECK(pr.stability == Stability::PositiveDefinite);
  CHECK(std::abs(std::abs(pr.complement(0, 0)) - 1.0) <= 1e-12);
  try {
    patrick_check(rotor, v2(0, 0), v1(1.0));
    FAIL("expected SymmetricPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SymmetricPoint);
  }
}

TEST_CASE("rotor Hessian with a stiffer spring") {
  ChartSystem sys = make_system("planar_rotor", {{"k", 3.0}});
  const Setup r(sys, v2(1, 0));
  // F = 3/2 u^2 + 1/(2u^2): Hessian 3 + 3/u^4
  CHECK(std::abs(hessian_F_U(r.sys, r.an, r.fam, r.slice, 0.1, v1(1.5))(0, 0) - (3.0 + 3.0 / std::pow(1.5, 4))) <= 1e-7);
}

TEST_CASE("spherical pendulum branch is stable for small tau") {
  const Setup p(make_system("spherical_pendulum"), v2(1, 0));
  const Seed s = find_seed(p.sys, p.an, p.fam, p.slice, v1(1.0), Vec());
  Branch b = continue_branch(p.sys, p.an, p.fam, p.slice, s, 0.3, 6);
  branch_stability(p.sys, p.an, p.slice, b);
  for (const auto& pt : b.points) CHECK(pt.stability == Stability::PositiveDefinite);
  for (size_t i = 1; i < b.points.size(); ++i) {
    const PatrickReport pr = patrick_check(p.sys, b.points[i].q, b.points[i].beta_val);
    CHECK(pr.stability == Stability::PositiveDefinite);
  }
}

TEST_CASE("sign-flipped potential is classified without failure") {
  ChartSystem flipped = make_system("spherical_pendulum");
  flipped.potential = [](const Vec& w) { return std::cos(w.norm()) - 1.0; };
  const Setup p(flipped, v2(1, 0));
  // F(0, u) = -u^2/2 + 1/(2u^2) has second derivative -1 + 3/u^4 < 0 at u = 2
  Branch b;
  b.fam = p.fam;
  for (double tau : {0.0, 0.05, 0.1}) {
    BranchPoint pt;
    pt.tau = tau;
    pt.u = v1(2.0);
    b.points.push_back(pt);
  }
  branch_stability(p.sys, p.an, p.slice, b);
  for (const auto& pt : b.points) {
    CHECK(pt.stability != Stability::NotComputed);
    CHECK(pt.stability != Stability::PositiveDefinite);
  }
  CHECK_FALSE(b.tau0_positive);
}

TEST_CASE("nonabelian groups are rejected") {
  Vec v0(6);
  v0 << 2, 0, 0, -1, 0, 0;
  const Setup t(make_system("so3_two_particle"), v0);
  Branch b;
  b.fam = t.fam;
  BranchPoint pt;
  pt.u = (Vec(3) << 1, 0, 0).finished();
  b.points.push_back(pt);
  try {
    branch_stability(t.sys, t.an, t.slice, b);
    FAIL("expected NonAbelian");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonAbelian);
  }
}

TEST_CASE("Patrick check on so(3) computes the coadjoint isotropy") {
  const ChartSystem sys = make_system("so3_two_particle");
  Vec q = sys.q_e;
  q(0) = 0.2;
  Vec mu = Vec::Zero(3);
  mu(2) = 0.5;
  const PatrickReport pr = patrick_check(sys, q, mu);
  REQUIRE(pr.g_mu.cols() == 1);
  CHECK(std::abs(std::abs(pr.g_mu(2, 0)) - 1.0) <= 1e-12);
  CHECK(pr.complement.cols() == 5);
}
