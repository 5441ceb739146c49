#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace tlhs;

TEST_CASE("dump_json prints floats with 17 significant digits") {
  Json j = Json::object();
  j["a"] = 0.1;
  j["b"] = 2.0;
  j["c"] = 3;
  j["d"] = std::numeric_limits<double>::quiet_NaN();
  j["e"] = Json::array({1.5, true, "x"});
  CHECK(dump_json(j, -1) == "{\"a\":0.10000000000000001,\"b\":2.0,\"c\":3,\"d\":null,"
                            "\"e\":[1.5,true,\"x\"]}\n");
  auto pretty = dump_json(j);
  CHECK(pretty.back() == '\n');
  CHECK(Json::parse(pretty)["a"].get<double>() == 0.1);
}

TEST_CASE("CSV round trip is bit exact") {
  auto s = apply_noise(tlhs::test::gaussian(3, 50, 2), {AgnosticRandom{0.2}, UnitVector::basis(3, 0)},
                       RngSeed{1});
  auto text = format_csv(s);
  CHECK(text.rfind("y,x1,x2,x3\n", 0) == 0);
  auto back = parse_csv(text);
  CHECK(back.dim() == 3);
  CHECK(std::ranges::equal(back.points(), s.points()));
  CHECK(std::ranges::equal(back.labels(), s.labels()));
}

TEST_CASE("CSV parse errors") {
  CHECK_CODE(parse_csv(""), ErrorCode::kIo);
  CHECK_CODE(parse_csv("y,x1,x2\n"), ErrorCode::kEmptyDataset);
  CHECK_CODE(parse_csv("y,x1,x2\n1,0.5\n"), ErrorCode::kIo);
  CHECK_CODE(parse_csv("y,x1,x2\n2,0.5,1\n"), ErrorCode::kIo);
  CHECK_CODE(parse_csv("y,x1,x2\n1,abc,1\n"), ErrorCode::kIo);
  CHECK_CODE(parse_csv("a,b,c\n1,1,1\n"), ErrorCode::kIo);
  CHECK_NOTHROW(parse_csv("y,x1,x2\r\n-1,0.5,1\r\n"));
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "tlhs_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "out.txt").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_CODE(read_file((dir / "missing.csv").string()), ErrorCode::kIo);
  CHECK_CODE(write_file_atomic((dir / "no/such/dir/x").string(), "x"), ErrorCode::kIo);
  std::filesystem::remove_all(dir);
}

TEST_CASE("report and result serialization") {
  TesterReport r;
  r.samples_used = 10;
  r.add("T1.moment(2,0)", 0.5, 0.25, false);
  auto j = to_json(r);
  CHECK(j["accepted"] == false);
  CHECK(j["samples_used"] == 10);
  CHECK(j["checks"][0]["name"] == "T1.moment(2,0)");
  CHECK(j["checks"][0]["passed"] == false);

  LearnResult lr;
  lr.rejected = true;
  auto jl = to_json(lr);
  CHECK(jl["rejected"] == true);
  CHECK(jl["hypothesis"].is_null());
}

TEST_CASE("generate_from_json") {
  Json spec = Json::parse(R"({"n": 200, "marginal": {"kind": "gaussian", "d": 3},
                              "noise": {"kind": "agnostic_random", "opt": 0.1},
                              "planted": [1, 0, 0]})");
  auto g = generate_from_json(spec, RngSeed{5});
  CHECK(g.data.size() == 200);
  CHECK(g.planted[0] == 1.0);
  CHECK(empirical_error(g.data, g.planted) == doctest::Approx(0.1));
  auto again = generate_from_json(spec, RngSeed{5});
  CHECK(std::ranges::equal(g.data.points(), again.data.points()));

  spec["typo"] = 1;
  CHECK_CODE(generate_from_json(spec, RngSeed{5}), ErrorCode::kInvalidArgument);
  Json bad = Json::parse(R"({"n": 10, "marginal": {"kind": "cauchy", "d": 3}})");
  CHECK_CODE(generate_from_json(bad, RngSeed{5}), ErrorCode::kInvalidArgument);
  Json mismatch = Json::parse(R"({"n": 10, "marginal": {"kind": "gaussian", "d": 3},
                                  "planted": [1, 0]})");
  CHECK_CODE(generate_from_json(mismatch, RngSeed{5}), ErrorCode::kDimensionMismatch);
}

TEST_CASE("run_tester_from_json dispatches to the testers") {
  auto s = tlhs::test::gaussian(3, 20000, 9);
  auto r = run_tester_from_json(s, Json::parse(R"({"tester": "t1", "k": 2, "seed": 1})"));
  CHECK(r.accepted);
  CHECK(r.checks.size() == 6);
  auto t2 = run_tester_from_json(
      s, Json::parse(R"({"tester": "t2", "w": [1, 0, 0], "sigma": 0.2, "seed": 1})"));
  CHECK(t2.checks.size() == 3);
  CHECK_CODE(run_tester_from_json(s, Json::parse(R"({"tester": "t4", "w": [1, 0, 0], "theta": 0.2,
                                                     "target": {"kind": "slc_tilt", "lambda": 1},
                                                     "seed": 1})")),
             ErrorCode::kModeMismatch);
  CHECK_CODE(run_tester_from_json(s, Json::parse(R"({"tester": "t9"})")),
             ErrorCode::kInvalidArgument);
}

TEST_CASE("learn_from_json requires a seed and a known mode") {
  auto s = tlhs::test::labeled_by(tlhs::test::gaussian(3, 100, 1), UnitVector::basis(3, 0));
  CHECK_CODE(learn_from_json(s, s, Json::parse(R"({"mode": "massart"})")),
             ErrorCode::kInvalidArgument);
  CHECK_CODE(learn_from_json(s, s, Json::parse(R"({"mode": "other", "seed": 1})")),
             ErrorCode::kInvalidArgument);
}

TEST_CASE("evaluate_from_json reports errors and the 2-D optimum") {
  auto s = apply_noise(tlhs::test::gaussian(2, 1000, 3), {AgnosticRandom{0.1}, UnitVector::basis(2, 0)},
                       RngSeed{4});
  auto j = evaluate_from_json(s, UnitVector::basis(2, 0),
                              Json::parse(R"({"planted": [1, 0], "oracle_2d": true})"));
  CHECK(j["n"] == 1000);
  CHECK(j["empirical_error"].get<double>() == doctest::Approx(0.1));
  CHECK(j["planted_angle"].get<double>() == 0.0);
  CHECK(j["opt_2d"].get<double>() <= 0.1);
  CHECK(j["excess_error"].get<double>() >= 0.0);
}

TEST_CASE("unit_vector_from_json") {
  auto u = unit_vector_from_json(Json::parse("[3, 4]"), 2);
  CHECK(u[0] == doctest::Approx(0.6));
  CHECK_CODE(unit_vector_from_json(Json::parse("[3, 4]"), 3), ErrorCode::kDimensionMismatch);
  CHECK_CODE(unit_vector_from_json(Json::parse("[0, 0]"), 2), ErrorCode::kZeroVector);
}
