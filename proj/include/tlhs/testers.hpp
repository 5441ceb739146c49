#pragma once

#include <functional>
#include <memory>
#include <string>

#include "tlhs/core.hpp"

namespace tlhs {

double normal_cdf(double x);
double normal_pdf(double x);
/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// E[x^alpha] under N(0, I): prod_i (alpha_i - 1)!! for even exponents, else 0.
double gaussian_moment(const MultiIndex& alpha);

enum class TargetKind { kStandardGaussian, kCustom };

/// The distribution D* the testers certify against.
class TargetMarginal {
 public:
  using MomentOracle = std::function<double(const MultiIndex&)>;
  using BandOracle = std::function<double(double)>;
  /// Fills one draw from D* into the span.
  using Sampler = std::function<void(Rng&, std::span<double>)>;

  /// Closed-form moments, band mass 2 Phi(sigma) - 1, K1 = 2 phi(1), K2 = 2 phi(0).
  static TargetMarginal standard_gaussian();
  /// The sampler is only needed by the conditional-moment tester.
  static TargetMarginal custom(MomentOracle moments, BandOracle band, double k1, double k2,
                               Sampler sampler = {});

  TargetKind kind() const noexcept { return kind_; }
  bool is_gaussian() const noexcept { return kind_ == TargetKind::kStandardGaussian; }
  double moment(const MultiIndex& alpha) const;
  double band_prob(double sigma) const;
  double k1() const noexcept { return k1_; }
  double k2() const noexcept { return k2_; }
  const Sampler& sampler() const noexcept { return sampler_; }

  /// E*[x^alpha | |<w,x>| <= sigma] for each alpha. Exact for the Gaussian;
  /// a cached rejection-sampling estimate for custom targets.
  std::vector<double> band_conditional_moments(const UnitVector& w, double sigma,
                                               std::span<const MultiIndex> alphas,
                                               std::size_t mc_samples, RngSeed seed) const;

 private:
  struct McCache;

  TargetMarginal() = default;
  void validate_band_constants() const;

  TargetKind kind_ = TargetKind::kStandardGaussian;
  MomentOracle moments_;
  BandOracle band_;
  Sampler sampler_;
  double k1_ = 0.0;
  double k2_ = 0.0;
  std::shared_ptr<McCache> cache_;
};

/// Exact E[x^alpha | |<w,x>| <= sigma] for x ~ N(0, I_d).
std::vector<double> gaussian_band_moments(const UnitVector& w, double sigma,
                                          std::span<const MultiIndex> alphas);

/// Rejection-sampling estimate of E[x^alpha | |<w,x>| <= sigma] under the sampler.
std::vector<double> band_moments_monte_carlo(const TargetMarginal::Sampler& sampler,
                                             const UnitVector& w, double sigma,
                                             std::span<const MultiIndex> alphas,
                                             std::size_t accepted, RngSeed seed);

enum class SlackMode { kTheory, kCalibrated };

struct TesterConfig {
  SlackMode slack_mode = SlackMode::kCalibrated;
  double calibration_inflation = 1.5;
  double delta = 0.05;
  /// Seeds the Monte-Carlo parts (T4 calibration, custom-target conditional moments).
  RngSeed seed;
  /// Upper bound on the conditional moment degree used by T3.
  unsigned max_conditional_degree = 4;
  std::size_t min_band_samples = 100;
  std::size_t conditional_mc_samples = 1'000'000;
  std::size_t calibration_reps = 200;
  std::size_t size_limit = kDefaultSizeLimit;

  void validate() const;
};

struct TesterCheck {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// accepted is the conjunction of the checks.
struct TesterReport {
  bool accepted = true;
  std::vector<TesterCheck> checks;
  std::size_t samples_used = 0;

  void add(std::string name, double measured, double threshold, bool passed);
  /// First failing check, if any.
  const TesterCheck* first_failure() const;
};

/// Two-sided slack for an empirical mean of n draws with the given per-draw
/// variance, at simultaneous level delta over `count` statistics.
double calibrated_slack(double variance, std::size_t n, std::size_t count, const TesterConfig& cfg);

/// T1: every degree-k empirical moment matches the target.
TesterReport tester_t1_moments(const LabeledDataset& s, unsigned k, const TesterConfig& cfg,
                               const TargetMarginal& target);

/// T2: the mass of the band |<w,x>| <= sigma is within K1 sigma / 2 of the target.
TesterReport tester_t2_band(const LabeledDataset& s, const UnitVector& w, double sigma,
                            const TesterConfig& cfg, const TargetMarginal& target);

/// Degree used by T3 for accuracy tau: ceil(1/tau^2) rounded up to even,
/// capped by cfg.max_conditional_degree and by the size limit.
unsigned conditional_degree(double tau, std::size_t d, const TesterConfig& cfg);

/// T3: runs T2, then matches the in-band moments of degree 1..k(tau).
TesterReport tester_t3_conditional(const LabeledDataset& s, const UnitVector& w, double sigma,
                                   double tau, const TesterConfig& cfg,
                                   const TargetMarginal& target);

/// T4 (standard Gaussian only): strip masses, in-strip orthogonal covariance
/// and tail mass along w.
TesterReport tester_t4_gaussian_strips(const LabeledDataset& s, const UnitVector& w, double theta,
                                       const TesterConfig& cfg);

/// Number of strips on each side of zero used by T4.
long strip_half_count(double theta);

/// Largest absolute eigenvalue of a symmetric n x n row-major matrix, by
/// power iteration on M^2, with a Jacobi fallback for near-degenerate
/// top eigenvalue pairs.
double operator_norm_symmetric(std::span<const double> m, std::size_t n);

struct AngleErrorBound {
  /// The balancing choice (C1 k)^{k/(2(k+1))} tan(theta)^{k/(k+1)} and the
  /// bound C3 sigma + (C1 k)^{k/2} tan(theta)^k / sigma^k at it.
  double sigma_opt = 0.0;
  double bound = 0.0;
  /// Exact minimizer of the same expression and its value.
  double sigma_min = 0.0;
  double bound_min = 0.0;
};

AngleErrorBound angle_to_error_bound(double theta, unsigned k, double c1, double c3);

}  // namespace tlhs
