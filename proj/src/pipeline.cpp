#include "tlhs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace tlhs {

double empirical_error(const LabeledDataset& s, const UnitVector& w) {
  require(s.dim() == w.dim(), ErrorCode::kDimensionMismatch, "empirical_error: dimension mismatch");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (halfspace_sign(dot(s.point(i), w.coords())) != s.label(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(s.size());
}

Selection select_best_candidate(const LabeledDataset& holdout,
                                std::span<const UnitVector> candidates) {
  if (candidates.empty()) fail(ErrorCode::kEmptyCandidateList, "no candidates to select from");
  std::size_t best = 0;
  double best_err = empirical_error(holdout, candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double e = empirical_error(holdout, candidates[i]);
    if (e < best_err) {
      best_err = e;
      best = i;
    }
  }
  return {candidates[best], best_err, best};
}

std::vector<double> sigma_grid_agnostic(double epsilon, unsigned k) {
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kInvalidArgument,
          "sigma grid: epsilon must be in (0,1)");
  require(k >= 2, ErrorCode::kInvalidArgument, "sigma grid: k must be >= 2");
  const double kd = static_cast<double>(k);
  const double spacing = 0.5 * std::pow(epsilon / std::sqrt(kd), 1.0 + 1.0 / kd);
  const double count = std::ceil(1.0 / spacing);
  if (!(count <= 1e6)) fail(ErrorCode::kSizeLimit, "sigma grid: more than 1e6 points");
  const auto steps = static_cast<std::size_t>(count);
  // Points 1, 1 - spacing, ..., down to the last positive one; returned ascending.
  std::vector<double> grid;
  for (std::size_t j = 0; j < steps; ++j) {
    const double s = 1.0 - static_cast<double>(j) * spacing;
    if (s <= 0.0) break;
    grid.push_back(s);
  }
  std::reverse(grid.begin(), grid.end());
  return grid;
}

std::vector<unsigned> auto_k_degrees(std::size_t d) {
  const double l = std::log2(static_cast<double>(d));
  const auto top = std::max(2u, static_cast<unsigned>(std::ceil(l * l - 1e-12)));
  std::vector<unsigned> ks;
  for (unsigned k = 2; k <= top; k += 2) ks.push_back(k);
  return ks;
}

void MassartConfig::validate() const {
  require(eta >= 0.0 && eta < 0.5, ErrorCode::kInvalidArgument, "massart: eta must be in [0,0.5)");
  require(epsilon > 0.0, ErrorCode::kInvalidArgument, "massart: epsilon must be positive");
  require(delta > 0.0 && delta < 1.0, ErrorCode::kInvalidArgument, "massart: delta must be in (0,1)");
  require(c1 > 0.0 && c2 > 0.0 && c2 < 1.0 && c_sigma > 0.0, ErrorCode::kInvalidArgument,
          "massart: constants must be positive with c2 < 1");
  tester_cfg.validate();
}

void AgnosticConfig::validate() const {
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kInvalidArgument,
          "agnostic: epsilon must be in (0,1)");
  require(delta > 0.0 && delta < 1.0, ErrorCode::kInvalidArgument,
          "agnostic: delta must be in (0,1)");
  if (mode == AgnosticMode::kSlcFixedK) {
    if (k < 2 || k % 2 != 0) fail(ErrorCode::kOddK, "agnostic: k must be even and >= 2");
  }
  require(c2 > 0.0 && c2 < 1.0 && c4 > 0.0, ErrorCode::kInvalidArgument,
          "agnostic: need c2 in (0,1) and c4 > 0");
  require(max_candidates_per_sigma >= 1, ErrorCode::kInvalidArgument,
          "agnostic: max_candidates_per_sigma must be >= 1");
  tester_cfg.validate();
}

namespace {

PsgdConfig psgd_config(std::size_t d, std::size_t n, double sigma, double grad_target,
                       RngSeed seed, const PsgdOverrides& o) {
  PsgdConfig cfg = PsgdConfig::defaults(d, sigma, grad_target, seed, o.max_iters_cap);
  if (o.step_size) cfg.step_size = *o.step_size;
  if (o.batch_size) cfg.batch_size = *o.batch_size;
  if (o.max_iters) {
    cfg.max_iters = *o.max_iters;
    if (!o.record_every) cfg.record_every = std::max<std::size_t>(1, (cfg.max_iters + 199) / 200);
  }
  if (o.record_every) cfg.record_every = *o.record_every;
  cfg.batch_size = std::min(cfg.batch_size, n);
  return cfg;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += workers) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Vetting {
  bool passed = true;
  std::vector<TesterReport> reports;
};

struct VetParams {
  double sigma = 0.0;
  double tau = 0.0;
  std::optional<double> theta;
};

// T3 (which starts with T2) at sigma/2 and sigma/6, then T4 when theta is set.
// A band too thin for T3 counts as a failed check. The band is symmetric, so
// the verdict for w also holds for -w.
Vetting vet_candidate(const LabeledDataset& s, const UnitVector& w, const VetParams& p,
                      const TesterConfig& tcfg, const TargetMarginal& target, bool stop_early) {
  Vetting v;
  auto keep = [&](TesterReport r) {
    v.passed = v.passed && r.accepted;
    v.reports.push_back(std::move(r));
    return v.passed || !stop_early;
  };
  for (double band : {p.sigma / 2.0, p.sigma / 6.0}) {
    TesterReport r;
    try {
      r = tester_t3_conditional(s, w, band, p.tau, tcfg, target);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientBandSamples) throw;
      r = tester_t2_band(s, w, band, tcfg, target);
      std::size_t inside = 0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::abs(dot(s.point(i), w.coords())) <= band) ++inside;
      }
      r.add("T3.band_samples", static_cast<double>(inside),
            static_cast<double>(tcfg.min_band_samples), false);
    }
    if (!keep(std::move(r))) return v;
  }
  if (p.theta) keep(tester_t4_gaussian_strips(s, w, *p.theta, tcfg));
  return v;
}

struct Vetted {
  std::vector<Vetting> outcomes;
  std::optional<std::size_t> first_failure;
};

Vetted vet_all(const LabeledDataset& s, std::span<const UnitVector> ws, const VetParams& p,
               const TesterConfig& tcfg, const TargetMarginal& target, unsigned threads,
               bool stop_early) {
  Vetted out;
  out.outcomes.resize(ws.size());
  parallel_for(ws.size(), threads, [&](std::size_t i) {
    out.outcomes[i] = vet_candidate(s, ws[i], p, tcfg, target, stop_early);
  });
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (!out.outcomes[i].passed) {
      out.first_failure = i;
      break;
    }
  }
  return out;
}

LearnResult reject_with(LearnResult r, std::vector<TesterReport> reports) {
  r.rejected = true;
  r.hypothesis.reset();
  r.empirical_error.reset();
  for (auto& rep : reports) {
    if (!rep.accepted) r.tester_reports.push_back(std::move(rep));
  }
  return r;
}

void check_inputs(const LabeledDataset& train, const LabeledDataset& holdout) {
  require(train.dim() == holdout.dim(), ErrorCode::kDimensionMismatch,
          "train and holdout dimensions differ");
}

struct Pooled {
  UnitVector w;
  double sigma;
};

}  // namespace

LearnResult learn_massart(const LabeledDataset& train, const LabeledDataset& holdout,
                          const MassartConfig& cfg, const TargetMarginal& target) {
  cfg.validate();
  check_inputs(train, holdout);
  const std::size_t d = train.dim();
  LearnResult result;

  result.tester_reports.push_back(tester_t1_moments(train, 2, cfg.tester_cfg, target));
  if (!result.tester_reports.back().accepted) {
    result.rejected = true;
    return result;
  }

  const double margin = 1.0 - 2.0 * cfg.eta;
  const double sigma = std::min(1.0, cfg.c_sigma * std::pow(cfg.epsilon, 1.5) * margin);
  result.sigma_used = sigma;
  const double grad_target = cfg.c1 * margin * sigma / 2.0;
  const auto list = psgd_candidates(
      train, {sigma}, psgd_config(d, train.size(), sigma, grad_target, cfg.seed, cfg.psgd));

  TesterConfig tcfg = cfg.tester_cfg;
  tcfg.delta = cfg.delta / static_cast<double>(list.size());
  const VetParams params{sigma, cfg.c2, std::nullopt};
  auto vetted =
      vet_all(train, list.candidates, params, tcfg, target, cfg.threads, cfg.strict_reject);
  result.candidates_examined = 2 * list.size();
  if (cfg.strict_reject && vetted.first_failure) {
    return reject_with(std::move(result), std::move(vetted.outcomes[*vetted.first_failure].reports));
  }

  std::vector<UnitVector> pool;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!vetted.outcomes[i].passed) continue;
    pool.push_back(list.candidates[i]);
    pool.push_back(-list.candidates[i]);
    source.insert(source.end(), {i, i});
  }
  if (pool.empty()) {
    result.rejected = true;
    return result;
  }
  const auto best = select_best_candidate(holdout, pool);
  result.hypothesis = best.hypothesis;
  result.empirical_error = best.error;
  auto& winner = vetted.outcomes[source[best.index]].reports;
  std::move(winner.begin(), winner.end(), std::back_inserter(result.tester_reports));
  return result;
}

LearnResult learn_agnostic(const LabeledDataset& train, const LabeledDataset& holdout,
                           const AgnosticConfig& cfg, const TargetMarginal& target) {
  cfg.validate();
  check_inputs(train, holdout);
  const bool gaussian = cfg.mode == AgnosticMode::kGaussian;
  if (gaussian && !target.is_gaussian()) {
    fail(ErrorCode::kModeMismatch, "agnostic gaussian mode needs the standard Gaussian target");
  }
  const std::size_t d = train.dim();
  const std::size_t n = train.size();
  LearnResult result;

  std::vector<unsigned> degrees{2};
  if (cfg.mode == AgnosticMode::kSlcFixedK && cfg.k != 2) degrees.push_back(cfg.k);
  if (cfg.mode == AgnosticMode::kSlcAutoK) degrees = auto_k_degrees(d);
  bool t1_ok = true;
  for (unsigned k : degrees) {
    result.tester_reports.push_back(tester_t1_moments(train, k, cfg.tester_cfg, target));
    t1_ok = t1_ok && result.tester_reports.back().accepted;
  }
  if (!t1_ok) {
    result.rejected = true;
    return result;
  }

  const unsigned k_bound = gaussian ? 2 : degrees.back();
  // Grid points whose thinnest band would hold too few samples for T3 are
  // dropped; the largest point is always kept.
  std::vector<double> grid;
  for (double s : sigma_grid_agnostic(cfg.epsilon, k_bound)) {
    const double expected = static_cast<double>(n) * target.band_prob(s / 6.0);
    if (expected >= 2.0 * static_cast<double>(cfg.tester_cfg.min_band_samples)) grid.push_back(s);
  }
  if (grid.empty()) grid.push_back(1.0);
  std::reverse(grid.begin(), grid.end());

  TesterConfig tcfg = cfg.tester_cfg;
  tcfg.delta = cfg.delta / static_cast<double>(grid.size() * cfg.max_candidates_per_sigma);
  auto theta_for = [&](double sigma) { return std::min(cfg.c4 * sigma, std::numbers::pi / 4.0); };
  auto params_for = [&](double sigma) {
    return VetParams{sigma, cfg.c2,
                     gaussian ? std::optional<double>(theta_for(sigma)) : std::nullopt};
  };

  std::vector<Pooled> pool;
  std::optional<UnitVector> warm;
  const Rng seeds(cfg.seed);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double sigma = grid[g];
    PsgdConfig pcfg = psgd_config(d, n, sigma, cfg.c2, RngSeed{seeds.split(g)()}, cfg.psgd);
    pcfg.init = warm;
    const auto list = psgd_candidates(train, {sigma}, pcfg);
    warm = list.candidates.back();

    const std::size_t take = std::min(list.size(), cfg.max_candidates_per_sigma);
    std::span<const UnitVector> chosen(list.candidates.data() + (list.size() - take), take);
    auto vetted = vet_all(train, chosen, params_for(sigma), tcfg, target, cfg.threads,
                          cfg.strict_reject);
    result.candidates_examined += 2 * take;
    if (cfg.strict_reject && vetted.first_failure) {
      result.sigma_used = sigma;
      return reject_with(std::move(result),
                         std::move(vetted.outcomes[*vetted.first_failure].reports));
    }
    for (std::size_t i = 0; i < take; ++i) {
      if (!vetted.outcomes[i].passed) continue;
      pool.push_back({chosen[i], sigma});
      pool.push_back({-chosen[i], sigma});
    }
  }
  if (pool.empty()) {
    result.rejected = true;
    return result;
  }

  std::vector<UnitVector> ws;
  ws.reserve(pool.size());
  for (const auto& p : pool) ws.push_back(p.w);
  const auto best = select_best_candidate(holdout, ws);
  const double sigma = pool[best.index].sigma;
  result.hypothesis = best.hypothesis;
  result.empirical_error = best.error;
  result.sigma_used = sigma;
  const double theta = theta_for(sigma);
  result.excess_bound = gaussian ? theta : angle_to_error_bound(theta, k_bound, 1.0, 1.0).bound;
  // Reports were not retained for every candidate; the winner's are recomputed.
  auto winner = vet_candidate(train, best.hypothesis, params_for(sigma), tcfg, target, false);
  std::move(winner.reports.begin(), winner.reports.end(),
            std::back_inserter(result.tester_reports));
  return result;
}

}  // namespace tlhs
