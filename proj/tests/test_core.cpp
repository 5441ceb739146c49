#include <cmath>
#include <numbers>
#include <set>

#include "support.hpp"

using namespace tlhs;
using tlhs::test::unit;

TEST_CASE("project_to_sphere scales to unit norm") {
  auto a = project_to_sphere(Vec{2, 0, 0});
  CHECK(a[0] == 1.0);
  CHECK(a[1] == 0.0);
  auto b = project_to_sphere(Vec{3, 4});
  CHECK(b[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_CODE(project_to_sphere(Vec{0, 0}), ErrorCode::kZeroVector);
  CHECK_CODE(project_to_sphere(Vec{1e-301, 0}), ErrorCode::kZeroVector);
}

TEST_CASE("project_to_sphere is idempotent") {
  Rng rng(RngSeed{5});
  for (int i = 0; i < 100; ++i) {
    Vec v(7);
    for (double& x : v) x = rng.normal() * 1e3;
    auto u = project_to_sphere(v);
    auto again = project_to_sphere(u.coords());
    for (std::size_t j = 0; j < 7; ++j) CHECK(std::abs(again[j] - u[j]) <= 1e-12);
    CHECK(std::abs(norm2(u.coords()) - 1.0) <= 1e-12);
  }
}

TEST_CASE("UnitVector rejects non-unit input and d < 2") {
  CHECK_CODE(UnitVector(Vec{1.0, 1.0}), ErrorCode::kInvalidArgument);
  CHECK_CODE(UnitVector(Vec{1.0}), ErrorCode::kInvalidArgument);
  CHECK_NOTHROW(UnitVector(Vec{1.0, 0.0}));
}

TEST_CASE("angle_between examples") {
  auto e1 = UnitVector::basis(3, 0), e2 = UnitVector::basis(3, 1);
  CHECK(angle_between(e1, e1) == 0.0);
  CHECK(angle_between(e1, e2) == doctest::Approx(std::numbers::pi / 2));
  CHECK(angle_between(e1, -e1) == doctest::Approx(std::numbers::pi));
  CHECK_CODE(angle_between(e1, UnitVector::basis(2, 0)), ErrorCode::kDimensionMismatch);
}

TEST_CASE("angle_between is symmetric and satisfies the triangle inequality") {
  Rng rng(RngSeed{11});
  for (int i = 0; i < 500; ++i) {
    auto a = random_unit_vector(4, rng), b = random_unit_vector(4, rng),
         c = random_unit_vector(4, rng);
    CHECK(angle_between(a, b) == angle_between(b, a));
    CHECK(angle_between(a, c) <= angle_between(a, b) + angle_between(b, c) + 1e-9);
  }
}

TEST_CASE("tangential_component examples and orthogonality") {
  auto t = tangential_component(Vec{1, 1}, UnitVector::basis(2, 0));
  CHECK(t == Vec{0, 1});
  auto w = unit({1, 2, 2});
  auto z = tangential_component(w.coords(), w);
  for (double x : z) CHECK(std::abs(x) <= 1e-15);
  CHECK(tangential_component(Vec{2, 3, 5}, UnitVector::basis(3, 2)) == Vec{2, 3, 0});

  Rng rng(RngSeed{3});
  for (int i = 0; i < 200; ++i) {
    Vec x(6);
    for (double& v : x) v = 10 * rng.normal();
    auto u = random_unit_vector(6, rng);
    CHECK(std::abs(dot(tangential_component(x, u), u.coords())) <= 1e-10 * norm2(x));
  }
  CHECK_CODE(tangential_component(Vec{1, 2, 3}, UnitVector::basis(2, 0)),
             ErrorCode::kDimensionMismatch);
}

TEST_CASE("orthogonal_basis spans the complement") {
  Rng rng(RngSeed{9});
  for (int i = 0; i < 20; ++i) {
    auto w = random_unit_vector(5, rng);
    auto basis = orthogonal_basis(w);
    REQUIRE(basis.size() == 4);
    for (std::size_t a = 0; a < 4; ++a) {
      CHECK(std::abs(dot(basis[a], w.coords())) <= 1e-12);
      for (std::size_t b = 0; b < 4; ++b) {
        CHECK(std::abs(dot(basis[a], basis[b]) - (a == b ? 1.0 : 0.0)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("enumerate_multi_indices order, count and limits") {
  auto one = enumerate_multi_indices(2, 1);
  REQUIRE(one.size() == 2);
  CHECK(one[0].exponents == std::vector<unsigned>{1, 0});
  CHECK(one[1].exponents == std::vector<unsigned>{0, 1});
  auto two = enumerate_multi_indices(2, 2);
  REQUIRE(two.size() == 3);
  CHECK(two[0].exponents == std::vector<unsigned>{2, 0});
  CHECK(two[1].exponents == std::vector<unsigned>{1, 1});
  CHECK(two[2].exponents == std::vector<unsigned>{0, 2});
  CHECK(enumerate_multi_indices(3, 2).size() == 6);
  CHECK(enumerate_multi_indices(4, 0).size() == 1);
  CHECK_CODE(enumerate_multi_indices(60, 8), ErrorCode::kSizeLimit);
  CHECK_CODE(enumerate_multi_indices(5, 4, 10), ErrorCode::kSizeLimit);
}

TEST_CASE("enumerate_multi_indices: no duplicates, right degree, binomial count") {
  for (std::size_t d = 1; d <= 6; ++d) {
    for (unsigned k = 0; k <= 6; ++k) {
      auto all = enumerate_multi_indices(d, k);
      // Binomial oracle by Pascal's rule.
      std::vector<std::vector<double>> c(d + k + 1, std::vector<double>(k + 1, 0.0));
      for (std::size_t r = 0; r <= d + k; ++r) {
        c[r][0] = 1;
        for (unsigned s = 1; s <= std::min<std::size_t>(r, k); ++s) c[r][s] = c[r - 1][s - 1] + c[r - 1][s];
      }
      CHECK(static_cast<double>(all.size()) == c[d + k - 1][k]);
      std::set<std::vector<unsigned>> seen;
      for (const auto& a : all) {
        CHECK(a.degree == k);
        unsigned sum = 0;
        for (unsigned e : a.exponents) sum += e;
        CHECK(sum == k);
        CHECK(seen.insert(a.exponents).second);
      }
      for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].exponents > all[i].exponents);
    }
  }
}

TEST_CASE("MultiIndex monomial") {
  MultiIndex a({2, 0, 1});
  CHECK(a.degree == 3);
  CHECK(a.monomial(Vec{3, 7, 2}) == 18.0);
}

TEST_CASE("LabeledDataset validation") {
  CHECK_CODE(LabeledDataset(2, {}, {}), ErrorCode::kEmptyDataset);
  CHECK_CODE(LabeledDataset(2, {1, 2, 3}, {1}), ErrorCode::kDimensionMismatch);
  CHECK_CODE(LabeledDataset(2, {1, 2}, {0}), ErrorCode::kInvalidArgument);
  CHECK_CODE(LabeledDataset(2, {1, NAN}, {1}), ErrorCode::kInvalidArgument);
  LabeledDataset s(2, {1, 2, 3, 4}, {1, -1});
  std::vector<std::size_t> rows{1};
  auto sub = s.subset(rows);
  CHECK(sub.size() == 1);
  CHECK(sub.point(0)[0] == 3.0);
  CHECK(sub.label(0) == -1);
}

TEST_CASE("Rng is deterministic and streams are independent") {
  Rng a(RngSeed{42}), b(RngSeed{42});
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  Rng s1 = Rng(RngSeed{42}).split(1), s2 = Rng(RngSeed{42}).split(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += s1() == s2();
  CHECK(same == 0);

  // Uniform mean and normal moments at 5 standard errors.
  Rng r(RngSeed{1});
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK_FALSE(u >= 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sn / n) < 5 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1) < 5 * std::sqrt(2.0 / n));
}

TEST_CASE("halfspace_sign uses sign(0) = +1") {
  CHECK(halfspace_sign(0.0) == 1);
  CHECK(halfspace_sign(-0.0) == 1);
  CHECK(halfspace_sign(-1e-300) == -1);
}
