#pragma once

#include <optional>

#include "tlhs/surrogate.hpp"

namespace tlhs {

struct PsgdConfig {
  double step_size = 0.0;
  std::size_t batch_size = 64;
  std::size_t max_iters = 1;
  double grad_target = 0.0;
  std::size_t record_every = 1;
  RngSeed seed;
  /// Starting point; uniform on the sphere from the seed when absent.
  std::optional<UnitVector> init;

  /// step = sigma^2/4, batch = 64, max_iters = ceil(40 d / (grad_target^2 sigma^2))
  /// capped at max_iters_cap, record_every = ceil(max_iters / max_records).
  static PsgdConfig defaults(std::size_t d, double sigma, double grad_target, RngSeed seed,
                             std::size_t max_iters_cap = kDefaultMaxItersCap,
                             std::size_t max_records = 200);

  static constexpr std::size_t kDefaultMaxItersCap = 2'000'000;
};

struct CandidateList {
  std::vector<UnitVector> candidates;
  /// Full-sample tangential gradient norm at each candidate.
  std::vector<double> grad_norms;

  std::size_t size() const noexcept { return candidates.size(); }
};

double full_gradient_norm(const LabeledDataset& s, const UnitVector& w, SurrogateParams p);

/// Projected minibatch SGD on the sphere. Records the starting point, every
/// record_every-th iterate and the final iterate; stops early once a recorded
/// iterate has full-sample gradient norm <= grad_target.
CandidateList psgd_candidates(const LabeledDataset& s, SurrogateParams p, const PsgdConfig& cfg);

}  // namespace tlhs
