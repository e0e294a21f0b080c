#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "relbif/lie_core.hpp"

using namespace relbif;

namespace {

// Rotation generators L_i with (L_i)_{jk} = -eps_{ijk}; [L_1, L_2] = L_3.
Mat rot_gen(int i) {
  Mat L = Mat::Zero(3, 3);
  const int j = (i + 1) % 3, k = (i + 2) % 3;
  L(k, j) = 1.0;
  L(j, k) = -1.0;
  return L;
}

Vec unhat(const Mat& L) { return Vec((Vec(3) << L(2, 1), L(0, 2), L(1, 0)).finished()); }

}  // namespace

TEST_CASE("bracket of an element with itself vanishes") {
  const auto so3 = make_so3<double>();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int s = 0; s < 20; ++s) {
    Vec x(3);
    for (int i = 0; i < 3; ++i) x(i) = N(rng);
    CHECK(bracket(so3, x, x).norm() <= 1e-14);
  }
}

TEST_CASE("so(3) brackets agree with matrix commutators") {
  const auto so3 = make_so3<double>();
  const Mat I = Mat::Identity(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const Mat comm = rot_gen(a) * rot_gen(b) - rot_gen(b) * rot_gen(a);
      CHECK((bracket(so3, Vec(I.col(a)), Vec(I.col(b))) - unhat(comm)).norm() <= 1e-15);
    }
  CHECK((bracket(so3, Vec(I.col(0)), Vec(I.col(1))) - Vec(I.col(2))).norm() == 0.0);
}

TEST_CASE("abelian brackets and coadjoint action vanish") {
  const auto t2 = make_abelian<double>(2);
  Vec x(2), y(2), m(2);
  x << 1.5, -2.0;
  y << 0.3, 4.0;
  m << 1.0, 2.0;
  CHECK(bracket(t2, x, y).norm() == 0.0);
  CHECK(coadjoint_ad_star(t2, x, m).norm() == 0.0);
  CHECK(t2.abelian());
  CHECK_FALSE(make_so3<double>().abelian());
}

TEST_CASE("catalog algebras validate") {
  for (const auto& alg : {make_so3<double>(), make_abelian<double>(1), make_abelian<double>(2)}) {
    const LieValidation v = validate_algebra(alg);
    CHECK(v.ok);
    CHECK(v.jacobi <= 1e-14);
    CHECK(v.invariance <= 1e-14);
    CHECK(v.torus_rank == alg.torus.cols());
  }
}

TEST_CASE("validation rejects broken structure constants") {
  auto bad = make_so3<double>();
  bad.c[2](0, 1) = 2.0;  // antisymmetry broken
  CHECK_FALSE(validate_algebra(bad).ok);
  auto bad_inner = make_so3<double>();
  bad_inner.inner(0, 0) = 3.0;  // no longer ad-invariant
  CHECK_FALSE(validate_algebra(bad_inner).ok);
  auto bad_dim = make_so3<double>();
  bad_dim.c.pop_back();
  CHECK_THROWS_AS(validate_algebra(bad_dim), Error);
}

TEST_CASE("torus complement") {
  SUBCASE("abelian: empty complement") {
    const TorusSplit s = split_torus_complement(make_abelian<double>(2));
    CHECK(s.torus.cols() == 2);
    CHECK(s.complement.cols() == 0);
  }
  SUBCASE("so(3): complement is span{e1, e2}") {
    const auto so3 = make_so3<double>();
    const TorusSplit s = split_torus_complement(so3);
    REQUIRE(s.complement.cols() == 2);
    CHECK(s.torus.cols() + s.complement.cols() == 3);
    Mat e12 = Mat::Identity(3, 3).leftCols(2);
    CHECK(subspace_distance(s.complement, e12, so3.inner) <= 1e-12);
  }
}

TEST_CASE("regular elements") {
  const auto so3 = make_so3<double>();
  CHECK_FALSE(is_regular(so3, Vec(Vec::Zero(3))));
  CHECK(is_regular(so3, Vec(Vec::Unit(3, 2))));
  CHECK(numerical_rank(ad_matrix(so3, Vec(Vec::Unit(3, 2))), 1e-8) == 2);
  CHECK_THROWS_AS(is_regular(so3, Vec(Vec::Unit(3, 0))), Error);
  const auto t2 = make_abelian<double>(2);
  Vec x(2);
  x << 0.0, 0.7;
  CHECK(is_regular(t2, x));
  CHECK(is_regular(t2, Vec(Vec::Zero(2))));
}

TEST_CASE("coadjoint action is the transpose of ad") {
  const auto so3 = make_so3<double>();
  const Vec e1 = Vec::Unit(3, 0), e2 = Vec::Unit(3, 1), e3 = Vec::Unit(3, 2);
  CHECK((coadjoint_ad_star(so3, e3, e1) + e2).norm() <= 1e-15);
  CHECK(coadjoint_ad_star(so3, e1, Vec(Vec::Zero(3))).norm() == 0.0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> N;
  for (int s = 0; s < 10; ++s) {
    Vec x(3), y(3), m(3);
    for (int i = 0; i < 3; ++i) x(i) = N(rng), y(i) = N(rng), m(i) = N(rng);
    CHECK(std::abs(coadjoint_ad_star(so3, x, m).dot(y) - m.dot(bracket(so3, x, y))) <= 1e-13);
  }
}

TEST_CASE("Ad of exp is orthogonal for the invariant inner product") {
  const auto so3 = make_so3<double>();
  Vec x(3);
  x << 0.3, -1.1, 0.5;
  const Mat Ad = adjoint_exp(so3, x);
  CHECK(max_abs(Ad.transpose() * so3.inner * Ad - so3.inner) <= 1e-13);
  CHECK((Ad * x - x).norm() <= 1e-13);
}

TEST_CASE("dimension mismatch is reported") {
  const auto so3 = make_so3<double>();
  CHECK_THROWS_AS(bracket(so3, Vec(Vec::Zero(2)), Vec(Vec::Zero(3))), Error);
}

TEST_CASE("works with long double scalars") {
  const auto so3 = make_so3<long double>();
  VecX<long double> a = VecX<long double>::Unit(3, 0), b = VecX<long double>::Unit(3, 1);
  CHECK(bracket(so3, a, b)(2) == 1.0L);
}
