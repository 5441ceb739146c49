#include "tlhs/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace tlhs {

PsgdConfig PsgdConfig::defaults(std::size_t d, double sigma, double grad_target, RngSeed seed,
                                std::size_t max_iters_cap, std::size_t max_records) {
  PsgdConfig cfg;
  cfg.step_size = sigma * sigma / 4.0;
  cfg.batch_size = 64;
  const double iters = std::ceil(40.0 * static_cast<double>(d) /
                                 (grad_target * grad_target * sigma * sigma));
  cfg.max_iters = iters >= static_cast<double>(max_iters_cap)
                      ? max_iters_cap
                      : std::max<std::size_t>(1, static_cast<std::size_t>(iters));
  cfg.grad_target = grad_target;
  cfg.record_every = std::max<std::size_t>(
      1, (cfg.max_iters + std::max<std::size_t>(1, max_records) - 1) /
             std::max<std::size_t>(1, max_records));
  cfg.seed = seed;
  return cfg;
}

double full_gradient_norm(const LabeledDataset& s, const UnitVector& w, SurrogateParams p) {
  return norm2(empirical_surrogate_gradient(s, w, p));
}

CandidateList psgd_candidates(const LabeledDataset& s, SurrogateParams p, const PsgdConfig& cfg) {
  require(s.size() > 0, ErrorCode::kEmptyDataset, "psgd: empty dataset");
  if (!(cfg.step_size > 0.0) || !std::isfinite(cfg.step_size)) {
    fail(ErrorCode::kNonPositiveStep, "psgd: step size must be positive");
  }
  require(cfg.batch_size >= 1 && cfg.batch_size <= s.size(), ErrorCode::kInvalidArgument,
          "psgd: batch size must be in [1, n]");
  require(cfg.max_iters >= 1 && cfg.record_every >= 1, ErrorCode::kInvalidArgument,
          "psgd: max_iters and record_every must be >= 1");
  require(cfg.grad_target > 0.0, ErrorCode::kInvalidArgument, "psgd: grad_target must be positive");

  const Ramp ramp(p);
  const std::size_t d = s.dim();
  Rng init_rng = Rng(cfg.seed).split(0);
  Rng batch_rng = Rng(cfg.seed).split(1);

  UnitVector w = cfg.init ? *cfg.init : random_unit_vector(d, init_rng);
  require(w.dim() == d, ErrorCode::kDimensionMismatch, "psgd: init dimension mismatch");

  CandidateList out;
  auto record = [&](const UnitVector& v) {
    const double g = full_gradient_norm(s, v, p);
    out.candidates.push_back(v);
    out.grad_norms.push_back(g);
    return g <= cfg.grad_target;
  };

  if (record(w)) return out;

  std::vector<std::size_t> batch(cfg.batch_size);
  Vec next(d);
  bool final_recorded = true;
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    for (auto& b : batch) b = batch_rng.index(s.size());
    const Vec g = surrogate_gradient_rows(s, batch, w, ramp);
    for (std::size_t j = 0; j < d; ++j) next[j] = w[j] - cfg.step_size * g[j];
    w = project_to_sphere(next);
    final_recorded = false;
    if (it % cfg.record_every == 0) {
      final_recorded = true;
      if (record(w)) return out;
    }
  }
  if (!final_recorded) record(w);
  return out;
}

}  // namespace tlhs
