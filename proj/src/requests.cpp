#include "tlhs/requests.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace tlhs {

namespace {

// Typed field access over a JSON object that remembers which keys were read.
class Fields {
 public:
  Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) bad("must be a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <class T>
  T get(const std::string& key) {
    if (!has(key)) bad("missing required field '" + key + "'");
    return as<T>(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return has(key) ? as<T>(key) : fallback;
  }

  const Json& raw(const std::string& key) {
    if (!has(key)) bad("missing required field '" + key + "'");
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) bad("unknown field '" + key + "'");
    }
  }

  [[noreturn]] void bad(const std::string& what) const {
    fail(ErrorCode::kInvalidArgument, where_ + ": " + what);
  }

 private:
  template <class T>
  T as(const std::string& key) {
    const Json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) bad("field '" + key + "' must be a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) bad("field '" + key + "' must be a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                     v.get<long long>() < 0)) {
        bad("field '" + key + "' must be a nonnegative integer");
      }
    } else {
      if (!v.is_number()) bad("field '" + key + "' must be a number");
    }
    return v.get<T>();
  }

  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Vec vec_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorCode::kInvalidArgument, what + " must be an array of numbers");
  Vec v;
  for (const auto& x : j) {
    if (!x.is_number()) fail(ErrorCode::kInvalidArgument, what + " must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

MarginalSpec marginal_from_json(const Json& j) {
  Fields f(j, "marginal");
  MarginalSpec spec;
  spec.d = f.get<std::size_t>("d");
  const auto kind = f.get<std::string>("kind");
  if (kind == "gaussian") {
    spec.kind = StandardGaussian{};
  } else if (kind == "aniso") {
    spec.kind = AnisoGaussian{vec_from_json(f.raw("scales"), "marginal.scales")};
  } else if (kind == "student_t") {
    spec.kind = StudentT{f.get<double>("dof", 3.0)};
  } else if (kind == "slc_tilt") {
    spec.kind = SlcExpTilt{f.get<double>("lambda")};
  } else if (kind == "planar_mixture") {
    Vec normal(spec.d, 0.0);
    if (spec.d > 0) normal[0] = 1.0;
    if (f.has("normal")) normal = vec_from_json(f.raw("normal"), "marginal.normal");
    spec.kind = PlanarMixture{f.get<double>("weight", 0.5), normal};
  } else {
    f.bad("unknown kind '" + kind + "'");
  }
  f.finish();
  spec.validate();
  return spec;
}

NoiseSpec noise_from_json(const Json& j, UnitVector planted) {
  Fields f(j, "noise");
  NoiseSpec spec{MassartConstant{0.0}, std::move(planted)};
  const auto kind = f.get<std::string>("kind");
  if (kind == "none") {
  } else if (kind == "massart_const") {
    spec.kind = MassartConstant{f.get<double>("eta")};
  } else if (kind == "massart_boundary") {
    spec.kind = MassartBoundary{f.get<double>("eta"), f.get<double>("width")};
  } else if (kind == "agnostic_random") {
    spec.kind = AgnosticRandom{f.get<double>("opt")};
  } else if (kind == "agnostic_boundary") {
    spec.kind = AgnosticBoundary{f.get<double>("opt")};
  } else {
    f.bad("unknown kind '" + kind + "'");
  }
  f.finish();
  spec.validate();
  return spec;
}

SlackMode slack_mode_from(const std::string& s) {
  if (s == "calibrated") return SlackMode::kCalibrated;
  if (s == "theory") return SlackMode::kTheory;
  fail(ErrorCode::kInvalidArgument, "slack_mode must be 'calibrated' or 'theory'");
}

// Tester configuration keys, read from whichever object holds them.
void read_tester_fields(Fields& f, TesterConfig& cfg) {
  cfg.slack_mode = slack_mode_from(f.get<std::string>("slack_mode", "calibrated"));
  cfg.calibration_inflation = f.get<double>("inflation", cfg.calibration_inflation);
  cfg.delta = f.get<double>("delta", cfg.delta);
  cfg.max_conditional_degree =
      f.get<unsigned>("max_conditional_degree", cfg.max_conditional_degree);
  cfg.min_band_samples = f.get<std::size_t>("min_band_samples", cfg.min_band_samples);
  cfg.conditional_mc_samples =
      f.get<std::size_t>("conditional_mc_samples", cfg.conditional_mc_samples);
  cfg.calibration_reps = f.get<std::size_t>("calibration_reps", cfg.calibration_reps);
}

PsgdOverrides psgd_from_json(const Json& j) {
  Fields f(j, "psgd");
  PsgdOverrides o;
  if (f.has("step_size")) o.step_size = f.get<double>("step_size");
  if (f.has("batch_size")) o.batch_size = f.get<std::size_t>("batch_size");
  if (f.has("max_iters")) o.max_iters = f.get<std::size_t>("max_iters");
  if (f.has("record_every")) o.record_every = f.get<std::size_t>("record_every");
  o.max_iters_cap = f.get<std::size_t>("max_iters_cap", o.max_iters_cap);
  f.finish();
  return o;
}

}  // namespace

UnitVector unit_vector_from_json(const Json& j, std::size_t d) {
  Vec v = vec_from_json(j, "direction");
  if (v.size() != d) {
    fail(ErrorCode::kDimensionMismatch, "direction has " + std::to_string(v.size()) +
                                            " coordinates, expected " + std::to_string(d));
  }
  return project_to_sphere(v);
}

Generated generate_from_json(const Json& spec, RngSeed seed) {
  Fields f(spec, "generate");
  const auto n = f.get<std::size_t>("n");
  require(n >= 1, ErrorCode::kInvalidArgument, "generate: n must be >= 1");
  const MarginalSpec marginal = marginal_from_json(f.raw("marginal"));
  const Rng streams(seed);

  Rng planted_rng = streams.split(2);
  UnitVector planted = random_unit_vector(marginal.d, planted_rng);
  if (f.has("planted")) {
    const Json& p = f.raw("planted");
    if (p.is_string()) {
      if (p.get<std::string>() != "random") f.bad("planted must be 'random' or an array");
    } else {
      planted = unit_vector_from_json(p, marginal.d);
    }
  }
  Json noise_json = Json{{"kind", "none"}};
  if (f.has("noise")) noise_json = f.raw("noise");
  const NoiseSpec noise = noise_from_json(noise_json, planted);
  f.finish();

  auto x = sample_marginal(marginal, n, RngSeed{streams.split(0)()});
  auto labeled = apply_noise(x, noise, RngSeed{streams.split(1)()});
  return {std::move(labeled), std::move(planted)};
}

TargetMarginal target_from_json(const Json& spec, std::size_t d) {
  Fields f(spec, "target");
  const auto kind = f.get<std::string>("kind", "gaussian");
  if (kind == "gaussian") {
    f.finish();
    return TargetMarginal::standard_gaussian();
  }
  if (kind == "slc_tilt") {
    const double lambda = f.get<double>("lambda");
    f.finish();
    return slc_tilt_target(d, lambda);
  }
  f.bad("unknown kind '" + kind + "'");
}

TesterConfig tester_config_from_json(const Json& spec) {
  Fields f(spec, "tester config");
  TesterConfig cfg;
  read_tester_fields(f, cfg);
  cfg.seed = RngSeed{f.get<std::uint64_t>("seed", 0)};
  f.finish();
  cfg.validate();
  return cfg;
}

TesterReport run_tester_from_json(const LabeledDataset& s, const Json& request) {
  Fields f(request, "tester request");
  const auto name = f.get<std::string>("tester");
  TesterConfig cfg;
  read_tester_fields(f, cfg);
  cfg.seed = RngSeed{f.get<std::uint64_t>("seed", 0)};
  cfg.validate();
  Json target_json = Json{{"kind", "gaussian"}};
  if (f.has("target")) target_json = f.raw("target");
  const std::size_t d = s.dim();

  TesterReport report;
  if (name == "t1") {
    const auto k = f.get<unsigned>("k");
    if (k < 2 || k % 2 != 0) fail(ErrorCode::kOddK, "t1: k must be even and >= 2");
    f.finish();
    report = tester_t1_moments(s, k, cfg, target_from_json(target_json, d));
  } else if (name == "t2" || name == "t3") {
    const UnitVector w = unit_vector_from_json(f.raw("w"), d);
    const double sigma = f.get<double>("sigma");
    if (name == "t2") {
      f.finish();
      report = tester_t2_band(s, w, sigma, cfg, target_from_json(target_json, d));
    } else {
      const double tau = f.get<double>("tau");
      f.finish();
      report = tester_t3_conditional(s, w, sigma, tau, cfg, target_from_json(target_json, d));
    }
  } else if (name == "t4") {
    const UnitVector w = unit_vector_from_json(f.raw("w"), d);
    const double theta = f.get<double>("theta");
    f.finish();
    if (!target_from_json(target_json, d).is_gaussian()) {
      fail(ErrorCode::kModeMismatch, "t4 only supports the standard Gaussian target");
    }
    report = tester_t4_gaussian_strips(s, w, theta, cfg);
  } else {
    f.bad("tester must be one of t1, t2, t3, t4");
  }
  return report;
}

LearnResult learn_from_json(const LabeledDataset& train, const LabeledDataset& holdout,
                            const Json& config) {
  Fields f(config, "learn config");
  const auto mode = f.get<std::string>("mode");
  const RngSeed seed{f.get<std::uint64_t>("seed")};
  TesterConfig tcfg;
  read_tester_fields(f, tcfg);
  tcfg.seed = RngSeed{Rng(seed).split(7)()};
  Json target_json = Json{{"kind", "gaussian"}};
  if (f.has("target")) target_json = f.raw("target");
  PsgdOverrides psgd;
  if (f.has("psgd")) psgd = psgd_from_json(f.raw("psgd"));
  const auto threads = f.get<unsigned>("threads", 1);
  const bool strict = f.get<bool>("strict_reject", true);

  if (mode == "massart") {
    MassartConfig cfg;
    cfg.eta = f.get<double>("eta");
    cfg.epsilon = f.get<double>("epsilon", cfg.epsilon);
    cfg.delta = tcfg.delta;
    cfg.c1 = f.get<double>("c1", cfg.c1);
    cfg.c2 = f.get<double>("c2", cfg.c2);
    cfg.c_sigma = f.get<double>("c_sigma", cfg.c_sigma);
    f.finish();
    cfg.tester_cfg = tcfg;
    cfg.psgd = psgd;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.strict_reject = strict;
    return learn_massart(train, holdout, cfg, target_from_json(target_json, train.dim()));
  }
  if (mode == "agnostic") {
    AgnosticConfig cfg;
    const auto sub = f.get<std::string>("submode", "gaussian");
    if (sub == "gaussian") {
      cfg.mode = AgnosticMode::kGaussian;
    } else if (sub == "slc_fixed_k") {
      cfg.mode = AgnosticMode::kSlcFixedK;
      cfg.k = f.get<unsigned>("k");
    } else if (sub == "slc_auto_k") {
      cfg.mode = AgnosticMode::kSlcAutoK;
    } else {
      f.bad("submode must be gaussian, slc_fixed_k or slc_auto_k");
    }
    cfg.epsilon = f.get<double>("epsilon", cfg.epsilon);
    cfg.delta = tcfg.delta;
    cfg.c2 = f.get<double>("c2", cfg.c2);
    cfg.c4 = f.get<double>("c4", cfg.c4);
    cfg.max_candidates_per_sigma =
        f.get<std::size_t>("max_candidates_per_sigma", cfg.max_candidates_per_sigma);
    f.finish();
    cfg.tester_cfg = tcfg;
    cfg.psgd = psgd;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.strict_reject = strict;
    return learn_agnostic(train, holdout, cfg, target_from_json(target_json, train.dim()));
  }
  f.bad("mode must be 'massart' or 'agnostic'");
}

Json evaluate_from_json(const LabeledDataset& s, const UnitVector& w, const Json& options) {
  Fields f(options, "evaluate options");
  require(s.dim() == w.dim(), ErrorCode::kDimensionMismatch,
          "evaluate: hypothesis and data dimensions differ");
  Json out;
  out["n"] = s.size();
  const double err = empirical_error(s, w);
  out["empirical_error"] = err;
  if (f.has("planted")) {
    const UnitVector planted = unit_vector_from_json(f.raw("planted"), s.dim());
    out["planted_angle"] = angle_between(w, planted);
    out["planted_error"] = empirical_error(s, planted);
  }
  if (f.get<bool>("oracle_2d", false)) {
    const auto opt = brute_force_opt_2d(s);
    out["opt_2d"] = opt.opt;
    out["opt_direction"] = to_json(opt.direction);
    out["excess_error"] = err - opt.opt;
  }
  f.finish();
  return out;
}

}  // namespace tlhs
