#include "tlhs/tlhs.h"

#include <cstring>
#include <new>
#include <string>

#include "tlhs/requests.hpp"

struct tlhs_dataset {
  tlhs::LabeledDataset data;
};

namespace {

thread_local std::string last_error;

tlhs_status record(tlhs_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class Fn>
tlhs_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return TLHS_OK;
  } catch (const tlhs::Error& e) {
    return record(static_cast<tlhs_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return record(TLHS_ERR_INVALID_ARGUMENT, std::string("malformed JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return record(TLHS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(TLHS_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(TLHS_ERR_INTERNAL, "unknown failure");
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) tlhs::fail(tlhs::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* to_c_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tlhs::Json parse(const char* text, const char* what) {
  need(text, what);
  return tlhs::Json::parse(text);
}

}  // namespace

extern "C" {

const char* tlhs_version(void) { return TLHS_VERSION; }

const char* tlhs_status_name(tlhs_status status) {
  if (status == TLHS_OK) return "Ok";
  if (status == TLHS_ERR_INTERNAL) return "Internal";
  return tlhs::error_code_name(static_cast<tlhs::ErrorCode>(status));
}

const char* tlhs_last_error_message(void) { return last_error.c_str(); }

tlhs_status tlhs_dataset_create(size_t d, size_t n, const double* points, const int* labels,
                                tlhs_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(points, "points");
    need(labels, "labels");
    tlhs::Vec pts(points, points + n * d);
    std::vector<int> ys(labels, labels + n);
    *out = new tlhs_dataset{tlhs::LabeledDataset(d, std::move(pts), std::move(ys))};
  });
}

tlhs_status tlhs_dataset_read_csv(const char* path, tlhs_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(path, "path");
    *out = new tlhs_dataset{tlhs::read_csv(path)};
  });
}

tlhs_status tlhs_dataset_write_csv(const tlhs_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(path, "path");
    tlhs::write_csv(path, ds->data);
  });
}

size_t tlhs_dataset_size(const tlhs_dataset* ds) { return ds ? ds->data.size() : 0; }

size_t tlhs_dataset_dim(const tlhs_dataset* ds) { return ds ? ds->data.dim() : 0; }

tlhs_status tlhs_dataset_copy(const tlhs_dataset* ds, double* points, int* labels) {
  return guarded([&] {
    need(ds, "dataset");
    if (points) {
      auto p = ds->data.points();
      std::copy(p.begin(), p.end(), points);
    }
    if (labels) {
      auto y = ds->data.labels();
      std::copy(y.begin(), y.end(), labels);
    }
  });
}

void tlhs_dataset_free(tlhs_dataset* ds) { delete ds; }

tlhs_status tlhs_generate(const char* spec_json, uint64_t seed, tlhs_dataset** out,
                          char** planted_json) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    if (planted_json) *planted_json = nullptr;
    auto g = tlhs::generate_from_json(parse(spec_json, "spec_json"), tlhs::RngSeed{seed});
    std::string planted = tlhs::dump_json(tlhs::to_json(g.planted), -1);
    auto* ds = new tlhs_dataset{std::move(g.data)};
    if (planted_json) {
      try {
        *planted_json = to_c_string(planted);
      } catch (...) {
        delete ds;
        throw;
      }
    }
    *out = ds;
  });
}

tlhs_status tlhs_run_tester(const tlhs_dataset* ds, const char* request_json, char** report_json,
                            int* accepted) {
  return guarded([&] {
    need(ds, "dataset");
    need(report_json, "report_json");
    need(accepted, "accepted");
    *report_json = nullptr;
    const auto report = tlhs::run_tester_from_json(ds->data, parse(request_json, "request_json"));
    *report_json = to_c_string(tlhs::dump_json(tlhs::to_json(report)));
    *accepted = report.accepted ? 1 : 0;
  });
}

tlhs_status tlhs_learn(const tlhs_dataset* train, const tlhs_dataset* holdout,
                       const char* config_json, char** result_json, int* rejected) {
  return guarded([&] {
    need(train, "train");
    need(holdout, "holdout");
    need(result_json, "result_json");
    need(rejected, "rejected");
    *result_json = nullptr;
    const auto result =
        tlhs::learn_from_json(train->data, holdout->data, parse(config_json, "config_json"));
    *result_json = to_c_string(tlhs::dump_json(tlhs::to_json(result)));
    *rejected = result.rejected ? 1 : 0;
  });
}

tlhs_status tlhs_evaluate(const tlhs_dataset* ds, const double* w, size_t d,
                          const char* options_json, char** metrics_json) {
  return guarded([&] {
    need(ds, "dataset");
    need(w, "w");
    need(metrics_json, "metrics_json");
    *metrics_json = nullptr;
    const auto hyp = tlhs::project_to_sphere(std::span<const double>(w, d));
    const tlhs::Json options =
        options_json ? tlhs::Json::parse(options_json) : tlhs::Json::object();
    *metrics_json = to_c_string(tlhs::dump_json(tlhs::evaluate_from_json(ds->data, hyp, options)));
  });
}

double tlhs_ramp_value(double t, double sigma) { return tlhs::ramp_value(t, {sigma}); }

double tlhs_ramp_derivative(double t, double sigma) { return tlhs::ramp_derivative(t, {sigma}); }

tlhs_status tlhs_format_json(const char* json, int indent, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = to_c_string(tlhs::dump_json(parse(json, "json"), indent));
  });
}

void tlhs_string_free(char* s) { delete[] s; }

}  // extern "C"
