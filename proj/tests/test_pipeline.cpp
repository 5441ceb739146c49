#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace tlhs;

namespace {

struct Split {
  LabeledDataset train, holdout;
};

Split massart_data(std::size_t d, std::size_t n, double eta, std::uint64_t seed) {
  const auto w = tlhs::test::unit(Vec(d, 1.0));
  auto label = [&](std::size_t size, std::uint64_t s) {
    return apply_noise(tlhs::test::gaussian(d, size, s), {MassartConstant{eta}, w}, RngSeed{s + 1});
  };
  return {label(n, seed), label(n / 2, seed + 100)};
}

MassartConfig quick_massart(double eta) {
  MassartConfig cfg;
  cfg.eta = eta;
  cfg.epsilon = 0.5;
  cfg.seed = RngSeed{3};
  cfg.tester_cfg.seed = RngSeed{4};
  cfg.psgd.max_iters_cap = 20000;
  return cfg;
}

void same_result(const LearnResult& a, const LearnResult& b) {
  CHECK(a.rejected == b.rejected);
  CHECK(a.candidates_examined == b.candidates_examined);
  CHECK(a.sigma_used == b.sigma_used);
  CHECK(a.hypothesis.has_value() == b.hypothesis.has_value());
  if (a.hypothesis && b.hypothesis) CHECK(tlhs::test::same(*a.hypothesis, *b.hypothesis));
  CHECK(a.tester_reports.size() == b.tester_reports.size());
}

}  // namespace

TEST_CASE("empirical_error examples") {
  auto s = tlhs::test::from_rows(2, {{{1, 0}, 1}, {{-1, 0}, 1}, {{0, 1}, 1}, {{0, -1}, -1}});
  CHECK(empirical_error(s, UnitVector::basis(2, 0)) == 0.5);
  CHECK(empirical_error(s, UnitVector::basis(2, 1)) == 0.0);
  CHECK_CODE(empirical_error(s, UnitVector::basis(3, 0)), ErrorCode::kDimensionMismatch);
}

TEST_CASE("select_best_candidate is a holdout argmin with lowest-index ties") {
  auto h = tlhs::test::labeled_by(tlhs::test::gaussian(2, 500, 1), UnitVector::basis(2, 0));
  std::vector<UnitVector> c{UnitVector::basis(2, 1), UnitVector::basis(2, 0),
                            UnitVector::basis(2, 0), -UnitVector::basis(2, 0)};
  auto sel = select_best_candidate(h, c);
  CHECK(sel.index == 1);
  CHECK(sel.error == 0.0);
  CHECK_CODE(select_best_candidate(h, std::span<const UnitVector>{}),
             ErrorCode::kEmptyCandidateList);
}

TEST_CASE("agnostic sigma grid") {
  auto g = sigma_grid_agnostic(0.1, 2);
  const double step = 0.5 * std::pow(0.1 / std::sqrt(2.0), 1.5);
  REQUIRE(g.size() >= 2);
  CHECK(g.back() == 1.0);
  CHECK(g.front() > 0.0);
  CHECK(g.front() <= step + 1e-12);
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] - g[i - 1] == doctest::Approx(step));
  }
  CHECK_CODE(sigma_grid_agnostic(1e-9, 2), ErrorCode::kSizeLimit);
  CHECK_CODE(sigma_grid_agnostic(0.0, 2), ErrorCode::kInvalidArgument);
  CHECK_CODE(sigma_grid_agnostic(0.1, 1), ErrorCode::kInvalidArgument);
}

TEST_CASE("auto-k degrees") {
  CHECK(auto_k_degrees(2) == std::vector<unsigned>{2});
  CHECK(auto_k_degrees(4) == std::vector<unsigned>{2, 4});
  CHECK(auto_k_degrees(10) == std::vector<unsigned>{2, 4, 6, 8, 10, 12});
}

TEST_CASE("config validation") {
  MassartConfig m;
  m.eta = 0.5;
  CHECK_CODE(m.validate(), ErrorCode::kInvalidArgument);
  m = {};
  m.epsilon = 0.0;
  CHECK_CODE(m.validate(), ErrorCode::kInvalidArgument);
  AgnosticConfig a;
  a.mode = AgnosticMode::kSlcFixedK;
  a.k = 3;
  CHECK_CODE(a.validate(), ErrorCode::kOddK);
  a = {};
  a.epsilon = 1.0;
  CHECK_CODE(a.validate(), ErrorCode::kInvalidArgument);
}

TEST_CASE("learn_massart accepts clean Gaussian data and finds a good halfspace") {
  auto data = massart_data(3, 20000, 0.1, 10);
  auto cfg = quick_massart(0.1);
  auto res = learn_massart(data.train, data.holdout, cfg, TargetMarginal::standard_gaussian());
  REQUIRE_FALSE(res.rejected);
  REQUIRE(res.hypothesis.has_value());
  REQUIRE(res.empirical_error.has_value());
  CHECK(*res.empirical_error <= 0.1 + 0.03);
  CHECK(angle_between(*res.hypothesis, tlhs::test::unit({1, 1, 1})) < 0.3);
  CHECK(res.sigma_used == doctest::Approx(0.5 * std::pow(0.5, 1.5) * 0.8));
  CHECK(res.candidates_examined > 0);
  REQUIRE_FALSE(res.tester_reports.empty());
  CHECK(res.tester_reports.front().checks.front().name.rfind("T1.", 0) == 0);

  SUBCASE("deterministic and independent of the thread count") {
    auto again = learn_massart(data.train, data.holdout, cfg, TargetMarginal::standard_gaussian());
    same_result(res, again);
    cfg.threads = 3;
    auto threaded = learn_massart(data.train, data.holdout, cfg, TargetMarginal::standard_gaussian());
    same_result(res, threaded);
  }
}

TEST_CASE("learn_massart rejects a heavy-tailed marginal") {
  const auto w = tlhs::test::unit({1, 1, 1});
  auto x = sample_marginal({StudentT{3.0}, 3}, 20000, RngSeed{1});
  auto train = apply_noise(x, {MassartConstant{0.1}, w}, RngSeed{2});
  auto holdout = train.subset(std::vector<std::size_t>{0, 1, 2, 3, 4});
  auto res = learn_massart(train, holdout, quick_massart(0.1), TargetMarginal::standard_gaussian());
  CHECK(res.rejected);
  CHECK_FALSE(res.hypothesis.has_value());
  REQUIRE_FALSE(res.tester_reports.empty());
  CHECK_FALSE(res.tester_reports.back().accepted);
}

TEST_CASE("learn_massart input checks") {
  auto data = massart_data(3, 2000, 0.1, 10);
  auto other = tlhs::test::gaussian(4, 100, 1);
  CHECK_CODE(learn_massart(data.train, other, quick_massart(0.1),
                           TargetMarginal::standard_gaussian()),
             ErrorCode::kDimensionMismatch);
}

TEST_CASE("learn_agnostic in gaussian mode") {
  const auto w = tlhs::test::unit({2, -1, 1});
  auto label = [&](std::size_t n, std::uint64_t s) {
    return apply_noise(tlhs::test::gaussian(3, n, s), {AgnosticRandom{0.05}, w}, RngSeed{s + 1});
  };
  auto train = label(30000, 40), holdout = label(15000, 41);
  AgnosticConfig cfg;
  cfg.epsilon = 0.5;
  cfg.seed = RngSeed{7};
  cfg.tester_cfg.seed = RngSeed{8};
  cfg.psgd.max_iters_cap = 5000;
  cfg.max_candidates_per_sigma = 5;
  auto res = learn_agnostic(train, holdout, cfg, TargetMarginal::standard_gaussian());
  REQUIRE_FALSE(res.rejected);
  REQUIRE(res.empirical_error.has_value());
  CHECK(*res.empirical_error <= 0.05 + 0.05);
  REQUIRE(res.excess_bound.has_value());
  CHECK(*res.excess_bound > 0.0);

  auto slc = slc_tilt_target(3, 1.0);
  CHECK_CODE(learn_agnostic(train, holdout, cfg, slc), ErrorCode::kModeMismatch);
}
