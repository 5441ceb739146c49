// Command-line front end. Everything algorithmic goes through the C API.
//
// Exit codes: 0 accepted / success, 3 rejected by a tester, 2 usage or
// runtime error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tlhs/tlhs.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitReject = 3;

struct Failure {
  std::string message;
};

[[noreturn]] void die(const std::string& msg) { throw Failure{msg}; }

void check(tlhs_status s) {
  if (s != TLHS_OK) {
    die(std::string(tlhs_status_name(s)) + ": " + tlhs_last_error_message());
  }
}

struct CString {
  char* p = nullptr;
  ~CString() { tlhs_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct Dataset {
  tlhs_dataset* p = nullptr;
  Dataset() = default;
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;
  ~Dataset() { tlhs_dataset_free(p); }
};

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) die("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Writes next to the target and renames so a failure leaves no partial file.
void write_text(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) die("cannot write '" + path + "'");
    f << text;
    if (!f.flush()) {
      std::error_code ec;
      fs::remove(tmp, ec);
      die("cannot write '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    die("cannot write '" + path + "'");
  }
}

std::string canonical(const Json& j, int indent = 2) {
  CString out;
  check(tlhs_format_json(j.dump().c_str(), indent, &out.p));
  return out.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
}

// A direction given inline ("1,0,0"), as a JSON file holding an array, or as
// a JSON object with a "hypothesis" array (a learn result).
Json direction_arg(const std::string& arg) {
  std::string text = arg;
  if (std::filesystem::is_regular_file(arg)) text = read_text(arg);
  try {
    Json j = Json::parse(text);
    if (j.is_object() && j.contains("hypothesis")) j = j["hypothesis"];
    if (j.is_array()) return j;
    if (j.is_number()) return Json::array({j});
  } catch (const Json::exception&) {
  }
  Json a = Json::array();
  std::stringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      a.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      die("cannot read a direction from '" + arg + "'");
    }
  }
  if (a.empty()) die("cannot read a direction from '" + arg + "'");
  return a;
}

std::vector<double> to_vector(const Json& a) {
  std::vector<double> v;
  for (const auto& x : a) {
    if (!x.is_number()) die("direction entries must be numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

std::string timestamp() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) return epoch;
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return std::to_string(std::chrono::duration_cast<std::chrono::seconds>(now).count());
}

// Written beside the main output as <out>.manifest.json.
void write_manifest(const std::string& out_path, const std::string& command, const Json& config,
                    std::uint64_t seed, const Json& inputs, const std::string& started,
                    const Json& extra = Json::object()) {
  if (out_path.empty() || out_path == "-") return;
  Json m;
  m["command"] = command;
  m["config"] = config;
  m["inputs"] = inputs;
  m["seed"] = seed;
  m["artifact_version"] = tlhs_version();
  m["timestamps"] = {{"start", started}, {"end", timestamp()}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_text(out_path + ".manifest.json", canonical(m));
}

Json target_json(const std::string& target, std::optional<double> lambda) {
  if (target == "gaussian") return {{"kind", "gaussian"}};
  if (target == "slc-tilt") {
    if (!lambda) die("--target slc-tilt needs --target-lambda");
    return {{"kind", "slc_tilt"}, {"lambda", *lambda}};
  }
  die("--target must be gaussian or slc-tilt");
}

std::string snake(std::string s) {
  for (char& c : s) {
    if (c == '-') c = '_';
  }
  return s;
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
  std::string marginal = "gaussian";
  std::size_t d = 0;
  std::size_t n = 0;
  std::vector<double> scales;
  double dof = 3.0;
  std::optional<double> lambda;
  double weight = 0.5;
  std::string noise = "none";
  std::optional<double> eta, opt, width;
  std::string planted = "random";
  std::string planted_out;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenArgs& a) {
  const std::string started = timestamp();
  Json marginal{{"kind", snake(a.marginal)}, {"d", a.d}};
  if (a.marginal == "gaussian") {
    marginal["kind"] = "gaussian";
  } else if (a.marginal == "aniso") {
    if (a.scales.empty()) die("--marginal aniso needs --scales");
    marginal["scales"] = a.scales;
  } else if (a.marginal == "student-t") {
    marginal["dof"] = a.dof;
  } else if (a.marginal == "slc-tilt") {
    if (!a.lambda) die("--marginal slc-tilt needs --lambda");
    marginal["lambda"] = *a.lambda;
  } else if (a.marginal == "planar-mixture") {
    marginal["weight"] = a.weight;
  }

  Json noise{{"kind", snake(a.noise)}};
  if (a.noise == "massart-const" || a.noise == "massart-boundary") {
    if (!a.eta) die("--noise " + a.noise + " needs --eta");
    noise["eta"] = *a.eta;
    if (a.noise == "massart-boundary") {
      if (!a.width) die("--noise massart-boundary needs --width");
      noise["width"] = *a.width;
    }
  } else if (a.noise == "agnostic-random" || a.noise == "agnostic-boundary") {
    if (!a.opt) die("--noise " + a.noise + " needs --opt");
    noise["opt"] = *a.opt;
  }

  Json spec{{"n", a.n}, {"marginal", marginal}, {"noise", noise}};
  spec["planted"] = a.planted == "random" ? Json("random") : direction_arg(a.planted);

  Dataset ds;
  CString planted;
  check(tlhs_generate(spec.dump().c_str(), a.seed, &ds.p, &planted.p));
  const Json planted_json = Json::parse(planted.str());
  check(tlhs_dataset_write_csv(ds.p, a.out.c_str()));
  if (!a.planted_out.empty()) write_text(a.planted_out, canonical(planted_json));
  write_manifest(a.out, "gen", spec, a.seed, Json::object(), started,
                 Json{{"planted", planted_json}});
  return kExitOk;
}

// ---- test ------------------------------------------------------------------

struct TestArgs {
  std::string tester;
  std::string data;
  std::optional<unsigned> k;
  std::string w;
  std::optional<double> sigma, tau, theta;
  std::string slack_mode = "calibrated";
  double delta = 0.05;
  double inflation = 1.5;
  std::optional<std::size_t> mc_samples;
  std::string target = "gaussian";
  std::optional<double> target_lambda;
  std::uint64_t seed = 0;
  std::string out;
};

int run_test(const TestArgs& a) {
  const std::string started = timestamp();
  Json req{{"tester", a.tester}};
  auto need = [&](bool ok, const char* flag) {
    if (!ok) die("tester " + a.tester + " needs " + flag);
  };
  if (a.tester == "t1") {
    need(a.k.has_value(), "--k");
    req["k"] = *a.k;
  } else {
    need(!a.w.empty(), "--w");
    req["w"] = direction_arg(a.w);
    if (a.tester == "t4") {
      need(a.theta.has_value(), "--theta");
      req["theta"] = *a.theta;
    } else {
      need(a.sigma.has_value(), "--sigma");
      req["sigma"] = *a.sigma;
      if (a.tester == "t3") {
        need(a.tau.has_value(), "--tau");
        req["tau"] = *a.tau;
      }
    }
  }
  req["slack_mode"] = a.slack_mode;
  req["delta"] = a.delta;
  req["inflation"] = a.inflation;
  if (a.mc_samples) req["conditional_mc_samples"] = *a.mc_samples;
  req["seed"] = a.seed;
  req["target"] = target_json(a.target, a.target_lambda);

  Dataset ds;
  check(tlhs_dataset_read_csv(a.data.c_str(), &ds.p));
  CString report;
  int accepted = 0;
  check(tlhs_run_tester(ds.p, req.dump().c_str(), &report.p, &accepted));
  emit(a.out, report.str());
  write_manifest(a.out, "test", req, a.seed, Json{{"data", a.data}}, started);
  if (!accepted) {
    const Json r = Json::parse(report.str());
    for (const auto& c : r["checks"]) {
      if (!c["passed"].get<bool>()) {
        std::cerr << "rejected: " << c["name"].get<std::string>() << "\n";
        break;
      }
    }
  }
  return accepted ? kExitOk : kExitReject;
}

// ---- learn -----------------------------------------------------------------

struct LearnArgs {
  std::string mode;
  std::string submode = "gaussian";
  std::optional<unsigned> k;
  std::string train, holdout;
  std::optional<double> eta;
  double epsilon = 0.1;
  double delta = 0.05;
  std::optional<double> c1, c2, c4, c_sigma;
  std::optional<std::size_t> max_candidates;
  std::optional<std::size_t> max_iters_cap;
  bool no_strict = false;
  std::string slack_mode = "calibrated";
  double inflation = 1.5;
  std::optional<std::size_t> mc_samples;
  std::string target = "gaussian";
  std::optional<double> target_lambda;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string out;
};

int run_learn(const LearnArgs& a) {
  const std::string started = timestamp();
  Json cfg{{"mode", a.mode}, {"seed", a.seed}};
  if (a.mode == "massart") {
    if (!a.eta) die("--mode massart needs --eta");
    cfg["eta"] = *a.eta;
    if (a.c1) cfg["c1"] = *a.c1;
    if (a.c_sigma) cfg["c_sigma"] = *a.c_sigma;
  } else {
    cfg["submode"] = snake(a.submode);
    if (a.submode == "slc-fixed-k") {
      if (!a.k) die("--submode slc-fixed-k needs --k");
      cfg["k"] = *a.k;
    }
    if (a.c4) cfg["c4"] = *a.c4;
    if (a.max_candidates) cfg["max_candidates_per_sigma"] = *a.max_candidates;
  }
  cfg["epsilon"] = a.epsilon;
  cfg["delta"] = a.delta;
  if (a.c2) cfg["c2"] = *a.c2;
  if (a.max_iters_cap) cfg["psgd"] = {{"max_iters_cap", *a.max_iters_cap}};
  cfg["strict_reject"] = !a.no_strict;
  cfg["slack_mode"] = a.slack_mode;
  cfg["inflation"] = a.inflation;
  if (a.mc_samples) cfg["conditional_mc_samples"] = *a.mc_samples;
  cfg["threads"] = a.threads;
  cfg["target"] = target_json(a.target, a.target_lambda);

  Dataset train, holdout;
  check(tlhs_dataset_read_csv(a.train.c_str(), &train.p));
  check(tlhs_dataset_read_csv(a.holdout.c_str(), &holdout.p));
  CString result;
  int rejected = 0;
  check(tlhs_learn(train.p, holdout.p, cfg.dump().c_str(), &result.p, &rejected));
  emit(a.out, result.str());
  // The thread count never changes results, so it stays out of the manifest.
  Json recorded = cfg;
  recorded.erase("threads");
  write_manifest(a.out, "learn", recorded, a.seed,
                 Json{{"train", a.train}, {"holdout", a.holdout}}, started);
  return rejected ? kExitReject : kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string hypothesis;
  std::string data;
  std::string planted;
  bool oracle_2d = false;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  const std::string started = timestamp();
  const Json hyp = direction_arg(a.hypothesis);
  Json options = Json::object();
  if (!a.planted.empty()) options["planted"] = direction_arg(a.planted);
  if (a.oracle_2d) options["oracle_2d"] = true;

  Dataset ds;
  check(tlhs_dataset_read_csv(a.data.c_str(), &ds.p));
  const auto w = to_vector(hyp);
  CString metrics;
  check(tlhs_evaluate(ds.p, w.data(), w.size(), options.dump().c_str(), &metrics.p));
  emit(a.out, metrics.str());
  Json cfg = options;
  cfg["hypothesis"] = hyp;
  write_manifest(a.out, "eval", cfg, 0, Json{{"data", a.data}}, started);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tester-learners for halfspaces under label noise"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tlhs_version()));

  GenArgs g;
  auto* gen = app.add_subcommand("gen", "Sample a labeled dataset");
  gen->add_option("--marginal", g.marginal)
      ->check(CLI::IsMember({"gaussian", "aniso", "student-t", "slc-tilt", "planar-mixture"}));
  gen->add_option("--d", g.d, "Dimension")->required();
  gen->add_option("--n", g.n, "Number of samples")->required();
  gen->add_option("--scales", g.scales, "Per-coordinate scales (aniso)")->delimiter(',');
  gen->add_option("--dof", g.dof, "Degrees of freedom (student-t)");
  gen->add_option("--lambda", g.lambda, "Tilt (slc-tilt)");
  gen->add_option("--weight", g.weight, "Planar fraction (planar-mixture)");
  gen->add_option("--noise", g.noise)
      ->check(CLI::IsMember({"none", "massart-const", "massart-boundary", "agnostic-random",
                             "agnostic-boundary"}));
  gen->add_option("--eta", g.eta, "Massart rate, in [0, 0.5)");
  gen->add_option("--opt", g.opt, "Agnostic flip fraction, in [0, 0.5]");
  gen->add_option("--width", g.width, "Noisy band half-width (massart-boundary)");
  gen->add_option("--planted", g.planted, "'random', a JSON file or a comma list");
  gen->add_option("--planted-out", g.planted_out, "Write the planted direction here");
  gen->add_option("--seed", g.seed)->required();
  gen->add_option("--out", g.out, "Output CSV")->required();

  TestArgs t;
  auto* test = app.add_subcommand("test", "Run one distribution tester");
  test->add_option("tester", t.tester)->required()->check(CLI::IsMember({"t1", "t2", "t3", "t4"}));
  test->add_option("--data", t.data)->required();
  test->add_option("--k", t.k, "Moment degree (t1)");
  test->add_option("--w", t.w, "Direction: JSON file or comma list");
  test->add_option("--sigma", t.sigma);
  test->add_option("--tau", t.tau);
  test->add_option("--theta", t.theta);
  test->add_option("--slack-mode", t.slack_mode)->check(CLI::IsMember({"calibrated", "theory"}));
  test->add_option("--delta", t.delta);
  test->add_option("--inflation", t.inflation);
  test->add_option("--conditional-mc-samples", t.mc_samples,
                   "Monte-Carlo draws for custom-target T3 moments");
  test->add_option("--target", t.target)->check(CLI::IsMember({"gaussian", "slc-tilt"}));
  test->add_option("--target-lambda", t.target_lambda);
  test->add_option("--seed", t.seed)->required();
  test->add_option("--out", t.out, "Report path (stdout if absent)");

  LearnArgs l;
  auto* learn = app.add_subcommand("learn", "Run a tester-learner");
  learn->add_option("--mode", l.mode)->required()->check(CLI::IsMember({"massart", "agnostic"}));
  learn->add_option("--submode", l.submode)
      ->check(CLI::IsMember({"gaussian", "slc-fixed-k", "slc-auto-k"}));
  learn->add_option("--k", l.k);
  learn->add_option("--train", l.train)->required();
  learn->add_option("--holdout", l.holdout)->required();
  learn->add_option("--eta", l.eta);
  learn->add_option("--epsilon", l.epsilon);
  learn->add_option("--delta", l.delta);
  learn->add_option("--c1", l.c1);
  learn->add_option("--c2", l.c2);
  learn->add_option("--c4", l.c4);
  learn->add_option("--c-sigma", l.c_sigma);
  learn->add_option("--max-candidates-per-sigma", l.max_candidates);
  learn->add_option("--max-iters-cap", l.max_iters_cap);
  learn->add_flag("--no-strict-reject", l.no_strict, "Drop failing candidates instead");
  learn->add_option("--slack-mode", l.slack_mode)->check(CLI::IsMember({"calibrated", "theory"}));
  learn->add_option("--inflation", l.inflation);
  learn->add_option("--conditional-mc-samples", l.mc_samples,
                    "Monte-Carlo draws for custom-target T3 moments");
  learn->add_option("--target", l.target)->check(CLI::IsMember({"gaussian", "slc-tilt"}));
  learn->add_option("--target-lambda", l.target_lambda);
  learn->add_option("--threads", l.threads)->check(CLI::Range(1u, 256u));
  learn->add_option("--seed", l.seed)->required();
  learn->add_option("--out", l.out, "Result path (stdout if absent)");

  EvalArgs e;
  auto* eval = app.add_subcommand("eval", "Evaluate a hypothesis");
  eval->add_option("--hypothesis", e.hypothesis, "Learn result, JSON array or comma list")
      ->required();
  eval->add_option("--data", e.data)->required();
  eval->add_option("--planted", e.planted);
  eval->add_flag("--oracle-2d", e.oracle_2d);
  eval->add_option("--out", e.out, "Metrics path (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*gen) return run_gen(g);
    if (*test) return run_test(t);
    if (*learn) return run_learn(l);
    if (*eval) return run_eval(e);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
