#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "tlhs/tlhs.h"

extern "C" int tlhs_c_header_roundtrip(void);

namespace {

using Json = nlohmann::json;

struct Owned {
  char* p = nullptr;
  ~Owned() { tlhs_string_free(p); }
  Json json() const { return Json::parse(p); }
};

struct Handle {
  tlhs_dataset* p = nullptr;
  ~Handle() { tlhs_dataset_free(p); }
};

const char* kSpec = R"({"n": 4000, "marginal": {"kind": "gaussian", "d": 3},
                       "noise": {"kind": "massart_const", "eta": 0.1}, "planted": [0, 1, 0]})";

}  // namespace

TEST_CASE("C header compiles as C") { CHECK(tlhs_c_header_roundtrip() == 2); }

TEST_CASE("version and status names") {
  CHECK(std::strlen(tlhs_version()) > 0);
  CHECK(std::string(tlhs_status_name(TLHS_OK)) == "Ok");
  CHECK(std::string(tlhs_status_name(TLHS_ERR_ODD_K)) == "OddK");
  CHECK(std::string(tlhs_status_name(TLHS_ERR_INTERNAL)) == "Internal");
}

TEST_CASE("dataset lifecycle") {
  const double pts[] = {1, 2, 3, 4, 5, 6};
  const int ys[] = {1, -1, 1};
  Handle h;
  REQUIRE(tlhs_dataset_create(2, 3, pts, ys, &h.p) == TLHS_OK);
  CHECK(tlhs_dataset_size(h.p) == 3);
  CHECK(tlhs_dataset_dim(h.p) == 2);
  std::vector<double> out(6);
  std::vector<int> labels(3);
  REQUIRE(tlhs_dataset_copy(h.p, out.data(), labels.data()) == TLHS_OK);
  CHECK(out[5] == 6.0);
  CHECK(labels[1] == -1);

  const auto path = (std::filesystem::temp_directory_path() / "tlhs_c_api.csv").string();
  REQUIRE(tlhs_dataset_write_csv(h.p, path.c_str()) == TLHS_OK);
  Handle back;
  REQUIRE(tlhs_dataset_read_csv(path.c_str(), &back.p) == TLHS_OK);
  CHECK(tlhs_dataset_size(back.p) == 3);
  std::filesystem::remove(path);

  CHECK(tlhs_dataset_size(nullptr) == 0);
  tlhs_dataset_free(nullptr);
}

TEST_CASE("errors map to status codes and set the message") {
  const double pts[] = {1, 2};
  const int bad[] = {0};
  tlhs_dataset* out = reinterpret_cast<tlhs_dataset*>(0x1);
  CHECK(tlhs_dataset_create(2, 1, pts, bad, &out) == TLHS_ERR_INVALID_ARGUMENT);
  CHECK(out == nullptr);
  CHECK(std::strlen(tlhs_last_error_message()) > 0);
  CHECK(tlhs_dataset_create(2, 0, pts, bad, &out) == TLHS_ERR_EMPTY_DATASET);
  CHECK(tlhs_dataset_create(2, 1, nullptr, bad, &out) == TLHS_ERR_INVALID_ARGUMENT);
  CHECK(tlhs_dataset_read_csv("/nonexistent/file.csv", &out) == TLHS_ERR_IO);
  Owned s;
  CHECK(tlhs_format_json("{not json", 2, &s.p) == TLHS_ERR_INVALID_ARGUMENT);
  CHECK(s.p == nullptr);
  // A successful call clears the message.
  Owned ok;
  REQUIRE(tlhs_format_json("[1]", -1, &ok.p) == TLHS_OK);
  CHECK(std::string(tlhs_last_error_message()).empty());
}

TEST_CASE("generate, test, learn and evaluate through the C API") {
  Handle train, holdout;
  Owned planted;
  REQUIRE(tlhs_generate(kSpec, 11, &train.p, &planted.p) == TLHS_OK);
  REQUIRE(tlhs_generate(kSpec, 12, &holdout.p, nullptr) == TLHS_OK);
  CHECK(planted.json() == Json::array({0.0, 1.0, 0.0}));
  CHECK(tlhs_dataset_size(train.p) == 4000);

  Owned report;
  int accepted = -1;
  REQUIRE(tlhs_run_tester(train.p, R"({"tester": "t1", "k": 2, "seed": 1})", &report.p,
                          &accepted) == TLHS_OK);
  CHECK(accepted == 1);
  CHECK(report.json()["accepted"] == true);
  Owned odd;
  CHECK(tlhs_run_tester(train.p, R"({"tester": "t1", "k": 3, "seed": 1})", &odd.p, &accepted) ==
        TLHS_ERR_ODD_K);

  Owned result;
  int rejected = -1;
  REQUIRE(tlhs_learn(train.p, holdout.p,
                     R"({"mode": "massart", "eta": 0.1, "epsilon": 0.6, "seed": 5,
                         "psgd": {"max_iters_cap": 5000}})",
                     &result.p, &rejected) == TLHS_OK);
  const auto r = result.json();
  CHECK(r["rejected"].get<bool>() == (rejected == 1));

  const double w[] = {0, 2, 0};
  Owned metrics;
  REQUIRE(tlhs_evaluate(holdout.p, w, 3, R"({"planted": [0, 1, 0]})", &metrics.p) == TLHS_OK);
  const auto m = metrics.json();
  CHECK(m["planted_angle"].get<double>() == 0.0);
  CHECK(m["empirical_error"].get<double>() == doctest::Approx(0.1).epsilon(0.2));
  Owned zero;
  const double z[] = {0, 0, 0};
  CHECK(tlhs_evaluate(holdout.p, z, 3, nullptr, &zero.p) == TLHS_ERR_ZERO_VECTOR);
}

TEST_CASE("ramp helpers and JSON formatting") {
  CHECK(tlhs_ramp_value(0.0, 1.0) == 0.5);
  CHECK(tlhs_ramp_derivative(0.0, 0.5) == 2.0);
  Owned s;
  REQUIRE(tlhs_format_json(R"({"a": 0.1, "b": [1, 2.0]})", -1, &s.p) == TLHS_OK);
  CHECK(std::string(s.p) == "{\"a\":0.10000000000000001,\"b\":[1,2.0]}\n");
}
