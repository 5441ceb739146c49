#pragma once

#include <optional>

#include "tlhs/optimizer.hpp"
#include "tlhs/testers.hpp"

namespace tlhs {

/// Fraction of samples with sign(<w,x>) != y, with sign(0) = +1.
double empirical_error(const LabeledDataset& s, const UnitVector& w);

struct Selection {
  UnitVector hypothesis;
  double error = 0.0;
  std::size_t index = 0;
};

/// Holdout-error argmin; ties go to the lowest index.
Selection select_best_candidate(const LabeledDataset& holdout,
                                std::span<const UnitVector> candidates);

/// Arithmetic grid over (0, 1] ending at 1 with spacing 0.5 (eps/sqrt(k))^{1+1/k}.
std::vector<double> sigma_grid_agnostic(double epsilon, unsigned k);

/// Optional replacements for the PsgdConfig::defaults fields.
struct PsgdOverrides {
  std::optional<double> step_size;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> max_iters;
  std::optional<std::size_t> record_every;
  std::size_t max_iters_cap = PsgdConfig::kDefaultMaxItersCap;
};

struct MassartConfig {
  double eta = 0.0;
  double epsilon = 0.1;
  double delta = 0.05;
  TesterConfig tester_cfg;
  PsgdOverrides psgd;
  RngSeed seed;
  /// Gradient threshold factor: grad_target = c1 (1 - 2 eta) sigma / 2.
  double c1 = 0.25;
  /// Conditional-moment accuracy tau.
  double c2 = 0.05;
  /// sigma = c_sigma eps^{3/2} (1 - 2 eta).
  double c_sigma = 0.5;
  /// Reject the run on any candidate's tester failure; otherwise drop it.
  bool strict_reject = true;
  /// Worker threads for candidate vetting; results do not depend on it.
  unsigned threads = 1;

  void validate() const;
};

enum class AgnosticMode { kGaussian, kSlcFixedK, kSlcAutoK };

struct AgnosticConfig {
  double epsilon = 0.05;
  double delta = 0.05;
  AgnosticMode mode = AgnosticMode::kGaussian;
  /// Degree for kSlcFixedK.
  unsigned k = 2;
  TesterConfig tester_cfg;
  PsgdOverrides psgd;
  RngSeed seed;
  /// Conditional-moment accuracy and PSGD gradient target.
  double c2 = 0.05;
  /// Strip width factor: theta = min(c4 sigma, pi/4).
  double c4 = 2.0;
  bool strict_reject = true;
  unsigned threads = 1;
  /// Most recent candidates per grid point that go on to vetting.
  std::size_t max_candidates_per_sigma = 20;

  void validate() const;
};

struct LearnResult {
  bool rejected = false;
  std::optional<UnitVector> hypothesis;
  std::optional<double> empirical_error;
  double sigma_used = 0.0;
  std::size_t candidates_examined = 0;
  /// Global T1 reports, then either the failing report or the winner's.
  std::vector<TesterReport> tester_reports;
  /// Analytic excess-error bound attached to the accepted hypothesis.
  std::optional<double> excess_bound;
};

LearnResult learn_massart(const LabeledDataset& train, const LabeledDataset& holdout,
                          const MassartConfig& cfg, const TargetMarginal& target);

LearnResult learn_agnostic(const LabeledDataset& train, const LabeledDataset& holdout,
                           const AgnosticConfig& cfg, const TargetMarginal& target);

/// Even degrees swept by the auto-k mode: 2, 4, ..., up to ceil(log2(d)^2).
std::vector<unsigned> auto_k_degrees(std::size_t d);

}  // namespace tlhs
