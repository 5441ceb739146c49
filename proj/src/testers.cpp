#include "tlhs/testers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

#include <boost/math/special_functions/erf.hpp>

namespace tlhs {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument, "normal_quantile: p must be in (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double gaussian_moment(const MultiIndex& alpha) {
  double m = 1.0;
  for (unsigned a : alpha.exponents) {
    if (a % 2 == 1) return 0.0;
    for (unsigned j = a; j > 1; j -= 2) m *= static_cast<double>(j - 1);
  }
  return m;
}

namespace {

MultiIndex doubled(const MultiIndex& alpha) {
  std::vector<unsigned> e = alpha.exponents;
  for (unsigned& a : e) a *= 2;
  return MultiIndex(std::move(e));
}

std::string index_label(const MultiIndex& alpha) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < alpha.exponents.size(); ++i) {
    if (i) os << ',';
    os << alpha.exponents[i];
  }
  os << ')';
  return os.str();
}

// E[t^a | |t| <= sigma] for standard normal t, a = 0..max_degree.
Vec truncated_normal_moments(double sigma, unsigned max_degree) {
  Vec out(max_degree + 1, 0.0);
  out[0] = 1.0;
  if (sigma <= 2.0) {
    // int_{-s}^{s} t^a e^{-t^2/2} dt = 2 s^{a+1} sum_j (-s^2/2)^j / (j! (a+2j+1)),
    // alternating but well conditioned for s <= 2 and free of the
    // cancellation the integration-by-parts recurrence suffers at small s.
    const double h = -0.5 * sigma * sigma;
    auto series = [h](unsigned a) {
      double sum = 0.0;
      double term = 1.0;
      for (unsigned j = 0; j < 400; ++j) {
        const double c = term / static_cast<double>(a + 2 * j + 1);
        sum += c;
        if (std::abs(c) <= 1e-19 * std::abs(sum)) break;
        term *= h / static_cast<double>(j + 1);
      }
      return sum;
    };
    const double s0 = series(0);
    for (unsigned a = 2; a <= max_degree; a += 2) {
      out[a] = std::pow(sigma, a) * series(a) / s0;
    }
  } else {
    const double j0 = 2.0 * normal_cdf(sigma) - 1.0;
    const double edge = 2.0 * normal_pdf(sigma);
    double prev = j0;
    for (unsigned a = 2; a <= max_degree; a += 2) {
      const double j = static_cast<double>(a - 1) * prev - edge * std::pow(sigma, a - 1);
      out[a] = j / j0;
      prev = j;
    }
  }
  return out;
}

// Moments of x = t w + z with z ~ N(0, I - w w^T) and t an independent
// band-truncated standard normal; this is N(0, I) conditioned on the band.
// Conditional on t, x is Gaussian with mean t w, so Stein's identity
//   E[x_i x^b] = t w_i E[x^b] + sum_j S_ij b_j E[x^{b - e_j}]
// yields each moment as a polynomial in t, integrated against the
// truncated-normal moments at the end.
class GaussianBandEngine {
 public:
  GaussianBandEngine(const UnitVector& w, double sigma, unsigned max_degree)
      : w_(w.coords().begin(), w.coords().end()),
        t_moments_(truncated_normal_moments(sigma, max_degree)) {}

  double moment(const MultiIndex& alpha) {
    const Vec& p = poly(alpha.exponents);
    double m = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) m += p[a] * t_moments_[a];
    return m;
  }

 private:
  const Vec& poly(const std::vector<unsigned>& alpha) {
    if (auto it = memo_.find(alpha); it != memo_.end()) return it->second;
    const std::size_t d = w_.size();
    unsigned degree = 0;
    std::size_t lead = d;
    for (std::size_t i = 0; i < d; ++i) {
      degree += alpha[i];
      if (alpha[i] > 0 && lead == d) lead = i;
    }
    Vec res(degree + 1, 0.0);
    if (lead == d) {
      res[0] = 1.0;
      return memo_.emplace(alpha, std::move(res)).first->second;
    }
    std::vector<unsigned> beta = alpha;
    --beta[lead];
    const Vec& pb = poly(beta);
    for (std::size_t a = 0; a < pb.size(); ++a) res[a + 1] += w_[lead] * pb[a];
    for (std::size_t j = 0; j < d; ++j) {
      if (beta[j] == 0) continue;
      const double cov = (j == lead ? 1.0 : 0.0) - w_[lead] * w_[j];
      if (cov == 0.0) continue;
      std::vector<unsigned> gamma = beta;
      --gamma[j];
      const Vec& pg = poly(gamma);
      for (std::size_t a = 0; a < pg.size(); ++a) res[a] += cov * beta[j] * pg[a];
    }
    return memo_.emplace(alpha, std::move(res)).first->second;
  }

  Vec w_;
  Vec t_moments_;
  std::map<std::vector<unsigned>, Vec> memo_;
};

}  // namespace

std::vector<double> gaussian_band_moments(const UnitVector& w, double sigma,
                                          std::span<const MultiIndex> alphas) {
  require(sigma > 0.0, ErrorCode::kInvalidArgument, "band moments: sigma must be positive");
  unsigned max_degree = 0;
  for (const auto& a : alphas) {
    require(a.dim() == w.dim(), ErrorCode::kDimensionMismatch, "band moments: dimension mismatch");
    max_degree = std::max(max_degree, a.degree);
  }
  GaussianBandEngine engine(w, sigma, max_degree);
  std::vector<double> out;
  out.reserve(alphas.size());
  for (const auto& a : alphas) out.push_back(engine.moment(a));
  return out;
}

namespace {

// Sums x^alpha over a stream of points for a fixed list of alphas, reusing a
// per-point table of coordinate powers.
class MonomialSums {
 public:
  MonomialSums(std::span<const MultiIndex> alphas, std::size_t d) : d_(d), sums_(alphas.size()) {
    for (const auto& a : alphas) {
      for (unsigned e : a.exponents) top_ = std::max(top_, e);
    }
    stride_ = top_ + 1;
    offsets_.push_back(0);
    for (const auto& a : alphas) {
      for (std::size_t i = 0; i < a.exponents.size(); ++i) {
        if (a.exponents[i] > 0) factors_.push_back(i * stride_ + a.exponents[i]);
      }
      offsets_.push_back(factors_.size());
    }
    powers_.resize(d_ * stride_);
  }

  void add(std::span<const double> x) {
    for (std::size_t i = 0; i < d_; ++i) {
      double* row = powers_.data() + i * stride_;
      row[0] = 1.0;
      for (unsigned e = 1; e <= top_; ++e) row[e] = row[e - 1] * x[i];
    }
    for (std::size_t a = 0; a + 1 < offsets_.size(); ++a) {
      double m = 1.0;
      for (std::size_t f = offsets_[a]; f < offsets_[a + 1]; ++f) m *= powers_[factors_[f]];
      sums_[a] += m;
    }
  }

  const Vec& sums() const noexcept { return sums_; }

 private:
  std::size_t d_;
  unsigned top_ = 0;
  std::size_t stride_ = 1;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> factors_;
  Vec powers_;
  Vec sums_;
};

}  // namespace

std::vector<double> band_moments_monte_carlo(const TargetMarginal::Sampler& sampler,
                                             const UnitVector& w, double sigma,
                                             std::span<const MultiIndex> alphas,
                                             std::size_t accepted, RngSeed seed) {
  require(static_cast<bool>(sampler), ErrorCode::kInvalidArgument,
          "band moments: target has no sampler");
  require(accepted > 0, ErrorCode::kInvalidArgument, "band moments: need at least one sample");
  Rng rng(seed);
  Vec x(w.dim());
  MonomialSums sums(alphas, w.dim());
  std::size_t hits = 0;
  const std::size_t max_draws = accepted * 100'000;
  for (std::size_t draw = 0; hits < accepted; ++draw) {
    if (draw >= max_draws) {
      fail(ErrorCode::kInvalidArgument, "band moments: band too thin for rejection sampling");
    }
    sampler(rng, x);
    if (std::abs(dot(x, w.coords())) > sigma) continue;
    ++hits;
    sums.add(x);
  }
  Vec out = sums.sums();
  for (double& v : out) v /= static_cast<double>(accepted);
  return out;
}

struct TargetMarginal::McCache {
  std::mutex mutex;
  std::map<std::tuple<Vec, double, std::vector<MultiIndex>>, std::vector<double>> entries;
};

TargetMarginal TargetMarginal::standard_gaussian() {
  TargetMarginal t;
  t.kind_ = TargetKind::kStandardGaussian;
  t.k1_ = 2.0 * normal_pdf(1.0);
  t.k2_ = 2.0 * normal_pdf(0.0);
  t.validate_band_constants();
  return t;
}

TargetMarginal TargetMarginal::custom(MomentOracle moments, BandOracle band, double k1, double k2,
                                      Sampler sampler) {
  require(static_cast<bool>(moments) && static_cast<bool>(band), ErrorCode::kInvalidArgument,
          "custom target: moment and band oracles are required");
  require(k1 > 0.0 && k2 >= k1, ErrorCode::kInvalidArgument, "custom target: need 0 < K1 <= K2");
  TargetMarginal t;
  t.kind_ = TargetKind::kCustom;
  t.moments_ = std::move(moments);
  t.band_ = std::move(band);
  t.sampler_ = std::move(sampler);
  t.k1_ = k1;
  t.k2_ = k2;
  t.cache_ = std::make_shared<McCache>();
  t.validate_band_constants();
  return t;
}

void TargetMarginal::validate_band_constants() const {
  for (double s : {0.01, 0.1, 0.5, 1.0}) {
    const double r = band_prob(s) / s;
    if (!(r >= k1_ && r <= k2_)) {
      std::ostringstream os;
      os << "target: band mass ratio " << r << " at sigma=" << s << " outside [K1, K2] = ["
         << k1_ << ", " << k2_ << "]";
      fail(ErrorCode::kInvalidArgument, os.str());
    }
  }
}

double TargetMarginal::moment(const MultiIndex& alpha) const {
  return is_gaussian() ? gaussian_moment(alpha) : moments_(alpha);
}

double TargetMarginal::band_prob(double sigma) const {
  return is_gaussian() ? 2.0 * normal_cdf(sigma) - 1.0 : band_(sigma);
}

std::vector<double> TargetMarginal::band_conditional_moments(const UnitVector& w, double sigma,
                                                             std::span<const MultiIndex> alphas,
                                                             std::size_t mc_samples,
                                                             RngSeed seed) const {
  if (is_gaussian()) return gaussian_band_moments(w, sigma, alphas);
  auto key = std::make_tuple(Vec(w.coords().begin(), w.coords().end()), sigma,
                             std::vector<MultiIndex>(alphas.begin(), alphas.end()));
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->entries.find(key); it != cache_->entries.end()) return it->second;
  }
  auto values = band_moments_monte_carlo(sampler_, w, sigma, alphas, mc_samples, seed);
  std::lock_guard lock(cache_->mutex);
  cache_->entries.emplace(std::move(key), values);
  return values;
}

void TesterConfig::validate() const {
  require(calibration_inflation >= 1.0, ErrorCode::kInvalidArgument,
          "tester config: calibration_inflation must be >= 1");
  require(delta > 0.0 && delta < 1.0, ErrorCode::kInvalidArgument,
          "tester config: delta must be in (0,1)");
  require(max_conditional_degree >= 2, ErrorCode::kInvalidArgument,
          "tester config: max_conditional_degree must be >= 2");
  require(calibration_reps >= 10, ErrorCode::kInvalidArgument,
          "tester config: calibration_reps must be >= 10");
}

void TesterReport::add(std::string name, double measured, double threshold, bool passed) {
  checks.push_back({std::move(name), measured, threshold, passed});
  accepted = accepted && passed;
}

const TesterCheck* TesterReport::first_failure() const {
  for (const auto& c : checks) {
    if (!c.passed) return &c;
  }
  return nullptr;
}

double calibrated_slack(double variance, std::size_t n, std::size_t count, const TesterConfig& cfg) {
  const double level = 1.0 - cfg.delta / (2.0 * static_cast<double>(std::max<std::size_t>(1, count)));
  const double z = normal_quantile(level);
  const double sd = std::sqrt(std::max(variance, 0.0) / static_cast<double>(n));
  return std::max(cfg.calibration_inflation * z * sd, 1e-12);
}

TesterReport tester_t1_moments(const LabeledDataset& s, unsigned k, const TesterConfig& cfg,
                               const TargetMarginal& target) {
  cfg.validate();
  if (k < 2 || k % 2 != 0) fail(ErrorCode::kOddK, "T1: k must be even and >= 2");
  const std::size_t d = s.dim();
  const std::size_t n = s.size();
  const auto alphas = enumerate_multi_indices(d, k, cfg.size_limit);

  MonomialSums acc(alphas, s.dim());
  for (std::size_t i = 0; i < n; ++i) acc.add(s.point(i));
  const Vec& sums = acc.sums();

  TesterReport report;
  report.samples_used = n;
  const double theory_slack = std::pow(static_cast<double>(d), -static_cast<double>(k));
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const double expected = target.moment(alphas[a]);
    const double dev = std::abs(sums[a] / static_cast<double>(n) - expected);
    double threshold = theory_slack;
    if (cfg.slack_mode == SlackMode::kCalibrated) {
      const double variance = target.moment(doubled(alphas[a])) - expected * expected;
      threshold = calibrated_slack(variance, n, alphas.size(), cfg);
    }
    report.add("T1.moment" + index_label(alphas[a]), dev, threshold, dev <= threshold);
  }
  return report;
}

TesterReport tester_t2_band(const LabeledDataset& s, const UnitVector& w, double sigma,
                            const TesterConfig& cfg, const TargetMarginal& target) {
  cfg.validate();
  require(s.dim() == w.dim(), ErrorCode::kDimensionMismatch, "T2: dimension mismatch");
  require(sigma > 0.0 && sigma < 1.0, ErrorCode::kInvalidArgument, "T2: sigma must be in (0,1)");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::abs(dot(s.point(i), w.coords())) <= sigma) ++inside;
  }
  const double frac = static_cast<double>(inside) / static_cast<double>(s.size());
  const double expected = target.band_prob(sigma);
  const double k1 = target.k1();
  TesterReport report;
  report.samples_used = s.size();
  const double dev = std::abs(frac - expected);
  report.add("T2.band_mass_deviation", dev, k1 * sigma / 2.0, dev <= k1 * sigma / 2.0);
  report.add("T2.band_mass_lower", frac, k1 * sigma / 2.0, frac > k1 * sigma / 2.0);
  const double upper = (target.k2() + k1 / 2.0) * sigma;
  report.add("T2.band_mass_upper", frac, upper, frac < upper);
  return report;
}

namespace {

std::size_t count_up_to(std::size_t d, unsigned k) {
  // Multi-indices of degree <= k in d variables: binomial(d + k, k).
  return multi_index_count(d + 1, k);
}

}  // namespace

unsigned conditional_degree(double tau, std::size_t d, const TesterConfig& cfg) {
  require(tau > 0.0 && tau < 1.0, ErrorCode::kInvalidArgument, "T3: tau must be in (0,1)");
  const double raw = std::ceil(1.0 / (tau * tau));
  unsigned cap = cfg.max_conditional_degree - cfg.max_conditional_degree % 2;
  unsigned k = raw >= cap ? cap : static_cast<unsigned>(raw);
  if (k % 2 == 1) ++k;
  k = std::min(k, cap);
  // Moments up to degree 2k are needed for the calibrated slack.
  while (k > 2 && count_up_to(d, 2 * k) > cfg.size_limit) k -= 2;
  if (count_up_to(d, 2 * k) > cfg.size_limit) {
    fail(ErrorCode::kSizeLimit, "T3: degree-2 conditional moments exceed the size limit");
  }
  return k;
}

TesterReport tester_t3_conditional(const LabeledDataset& s, const UnitVector& w, double sigma,
                                   double tau, const TesterConfig& cfg,
                                   const TargetMarginal& target) {
  cfg.validate();
  require(s.dim() == w.dim(), ErrorCode::kDimensionMismatch, "T3: dimension mismatch");
  require(sigma > 0.0 && sigma < 1.0, ErrorCode::kInvalidArgument, "T3: sigma must be in (0,1)");
  const std::size_t d = s.dim();
  const unsigned k = conditional_degree(tau, d, cfg);

  std::vector<std::size_t> band;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::abs(dot(s.point(i), w.coords())) <= sigma) band.push_back(i);
  }
  if (band.size() < cfg.min_band_samples) {
    fail(ErrorCode::kInsufficientBandSamples,
         "T3: only " + std::to_string(band.size()) + " samples in the band (need " +
             std::to_string(cfg.min_band_samples) + ")");
  }

  TesterReport report = tester_t2_band(s, w, sigma, cfg, target);
  if (!report.accepted) return report;

  std::vector<MultiIndex> alphas;
  for (unsigned j = 1; j <= k; ++j) {
    auto level = enumerate_multi_indices(d, j, cfg.size_limit);
    alphas.insert(alphas.end(), level.begin(), level.end());
  }
  const std::size_t count = alphas.size();
  std::vector<MultiIndex> needed = alphas;
  if (cfg.slack_mode == SlackMode::kCalibrated) {
    for (std::size_t a = 0; a < count; ++a) needed.push_back(doubled(alphas[a]));
  }
  const auto expected = target.band_conditional_moments(w, sigma, needed,
                                                        cfg.conditional_mc_samples, cfg.seed);

  MonomialSums acc(alphas, d);
  for (std::size_t r : band) acc.add(s.point(r));
  const Vec& sums = acc.sums();
  const std::size_t m = band.size();
  const double theory_slack = tau * std::pow(static_cast<double>(d), -2.0 * k);
  for (std::size_t a = 0; a < count; ++a) {
    const double dev = std::abs(sums[a] / static_cast<double>(m) - expected[a]);
    double threshold = theory_slack;
    if (cfg.slack_mode == SlackMode::kCalibrated) {
      const double variance = expected[count + a] - expected[a] * expected[a];
      threshold = calibrated_slack(variance, m, count, cfg);
    }
    report.add("T3.cond_moment" + index_label(alphas[a]), dev, threshold, dev <= threshold);
  }
  return report;
}

long strip_half_count(double theta) {
  return static_cast<long>(std::ceil(std::sqrt(2.0 * std::log(1.0 / theta)) / theta));
}

namespace {

// sqrt(m) ||C - I||_op for the sample second-moment matrix C of m draws from
// N(0, I_p), over reps independent replicates; sorted ascending.
std::vector<double> simulate_covariance_deviation(std::size_t p, std::size_t m, std::size_t reps,
                                                  RngSeed seed) {
  Rng rng(seed);
  std::vector<double> stats;
  stats.reserve(reps);
  Vec acc(p * p);
  Vec z(p);
  for (std::size_t r = 0; r < reps; ++r) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (double& v : z) v = rng.normal();
      for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) acc[a * p + b] += z[a] * z[b];
      }
    }
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) {
        const double v = acc[a * p + b] / static_cast<double>(m) - (a == b ? 1.0 : 0.0);
        acc[a * p + b] = v;
        acc[b * p + a] = v;
      }
    }
    stats.push_back(std::sqrt(static_cast<double>(m)) * operator_norm_symmetric(acc, p));
  }
  std::sort(stats.begin(), stats.end());
  return stats;
}

const std::vector<double>& cached_covariance_deviation(std::size_t p, std::size_t m,
                                                       std::size_t reps, RngSeed seed) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::uint64_t>;
  static std::mutex mutex;
  static std::map<Key, std::vector<double>> cache;
  const Key key{p, m, reps, seed.value};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto stats = simulate_covariance_deviation(p, m, reps, seed);
  std::lock_guard lock(mutex);
  // std::map never moves its nodes, so the reference stays valid.
  return cache.emplace(key, std::move(stats)).first->second;
}

// Upper `level` quantile of sorted stats: the empirical quantile where the
// replicates resolve it, a normal extrapolation of the tail otherwise, and
// the larger of the two.
double upper_quantile(const std::vector<double>& stats, double level) {
  const std::size_t reps = stats.size();
  const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / static_cast<double>(reps);
  double var = 0.0;
  for (double v : stats) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(reps - 1));
  const double resolvable = std::min(level, 1.0 - 1.0 / static_cast<double>(reps));
  const auto rank = static_cast<std::size_t>(std::ceil(resolvable * static_cast<double>(reps)));
  const double empirical = stats[std::min(reps - 1, rank > 0 ? rank - 1 : 0)];
  return std::max(empirical, mean + normal_quantile(level) * sd);
}

}  // namespace

TesterReport tester_t4_gaussian_strips(const LabeledDataset& s, const UnitVector& w, double theta,
                                       const TesterConfig& cfg) {
  cfg.validate();
  require(s.dim() == w.dim(), ErrorCode::kDimensionMismatch, "T4: dimension mismatch");
  if (!(theta > 0.0 && theta <= std::numbers::pi / 4.0)) {
    fail(ErrorCode::kThetaOutOfRange, "T4: theta must be in (0, pi/4]");
  }
  const std::size_t d = s.dim();
  const std::size_t p = d - 1;
  const std::size_t n = s.size();
  const long half = strip_half_count(theta);
  const std::size_t strips = static_cast<std::size_t>(2 * half + 1);
  const double tail_cut = std::sqrt(2.0 * std::log(1.0 / theta));
  const auto basis = orthogonal_basis(w);

  std::vector<std::size_t> counts(strips, 0);
  std::vector<double> second(strips * p * p, 0.0);
  std::size_t tail = 0;
  Vec z(p);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = s.point(i);
    const double m = dot(x, w.coords());
    if (std::abs(m) > tail_cut) ++tail;
    const double slot = std::floor(m / theta);
    if (slot < -static_cast<double>(half) || slot > static_cast<double>(half)) continue;
    const auto idx = static_cast<std::size_t>(static_cast<long>(slot) + half);
    ++counts[idx];
    for (std::size_t a = 0; a < p; ++a) z[a] = dot(basis[a], x);
    double* acc = second.data() + idx * p * p;
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) acc[a * p + b] += z[a] * z[b];
    }
  }

  const std::size_t min_count = 50 * d;
  std::size_t checked = 0;
  std::size_t smallest = 0;
  for (std::size_t c : counts) {
    if (c >= min_count && p > 0) {
      ++checked;
      smallest = smallest == 0 ? c : std::min(smallest, c);
    }
  }
  // Calibrating the sqrt(m)-scaled deviation at the smallest checked strip is
  // conservative for larger strips: the statistic decreases in m.
  double scaled_quantile = 0.0;
  if (cfg.slack_mode == SlackMode::kCalibrated && checked > 0) {
    // Rounding m_ref down to a power of two lets repeated calls share the
    // simulation; a smaller m only fattens the tail.
    const std::size_t m_ref = std::bit_floor(std::min<std::size_t>(smallest, 20'000));
    const double level = 1.0 - cfg.delta / static_cast<double>(checked);
    scaled_quantile = upper_quantile(
        cached_covariance_deviation(p, m_ref, cfg.calibration_reps, cfg.seed), level);
  }

  TesterReport report;
  report.samples_used = n;
  Vec cov(p * p);
  for (std::size_t idx = 0; idx < strips; ++idx) {
    const long i = static_cast<long>(idx) - half;
    const std::string tag = "[" + std::to_string(i) + "]";
    const double frac = static_cast<double>(counts[idx]) / static_cast<double>(n);
    report.add("T4.strip_mass" + tag, frac, 2.0 * theta, frac <= 2.0 * theta);
    const std::size_t c = counts[idx];
    if (c < min_count || p == 0) continue;
    const double* acc = second.data() + idx * p * p;
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) {
        const double v = acc[a * p + b] / static_cast<double>(c) - (a == b ? 1.0 : 0.0);
        cov[a * p + b] = v;
        cov[b * p + a] = v;
      }
    }
    const double dev = operator_norm_symmetric(cov, p);
    double threshold = 0.1;
    if (cfg.slack_mode == SlackMode::kCalibrated) {
      threshold = std::max(threshold, cfg.calibration_inflation * scaled_quantile /
                                          std::sqrt(static_cast<double>(c)));
    }
    report.add("T4.strip_cov" + tag, dev, threshold, dev <= threshold);
  }
  const double tail_frac = static_cast<double>(tail) / static_cast<double>(n);
  report.add("T4.tail_mass", tail_frac, 5.0 * theta, tail_frac <= 5.0 * theta);
  return report;
}

namespace {

// Cyclic Jacobi sweeps; used when the top two |eigenvalues| are too close for
// power iteration to separate within its iteration budget.
double jacobi_spectral_radius(std::span<const double> m, std::size_t n) {
  Vec a(m.begin(), m.end());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i * n + j] * a[i * n + j];
        if (i != j) off += a[i * n + j] * a[i * n + j];
      }
    }
    if (off <= 1e-30 * total) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
    if (sweep == 99) fail(ErrorCode::kNoConvergence, "operator norm: Jacobi sweeps did not converge");
  }
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(a[i * n + i]));
  return r;
}

}  // namespace

double operator_norm_symmetric(std::span<const double> m, std::size_t n) {
  require(m.size() == n * n, ErrorCode::kDimensionMismatch, "operator norm: matrix size mismatch");
  if (n == 0) return 0.0;
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(m[i * n + j] - m[j * n + i]) > 1e-9 * std::max(1.0, scale)) {
        fail(ErrorCode::kNotSymmetric, "operator norm: matrix is not symmetric");
      }
    }
  }
  if (scale == 0.0) return 0.0;

  auto apply = [&](const Vec& in, Vec& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += m[i * n + j] * in[j];
      out[i] = s;
    }
  };
  // Fixed pseudo-random start so results are reproducible.
  Rng rng(RngSeed{0x6F70E0A5ULL});
  Vec v(n), mv(n), mmv(n);
  for (double& x : v) x = rng.normal();
  double vn = norm2(v);
  for (double& x : v) x /= vn;

  if (!std::isfinite(scale)) fail(ErrorCode::kNoConvergence, "operator norm: non-finite entries");

  constexpr int kMaxIters = 10'000;
  for (int it = 0; it < kMaxIters; ++it) {
    apply(v, mv);
    apply(mv, mmv);
    // Rayleigh quotient of M^2 at unit v.
    const double lambda = dot(mv, mv);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += (mmv[i] - lambda * v[i]) * (mmv[i] - lambda * v[i]);
    res = std::sqrt(res);
    if (lambda == 0.0) return 0.0;
    if (res <= 1e-8 * lambda) return std::sqrt(lambda);
    vn = norm2(mmv);
    for (std::size_t i = 0; i < n; ++i) v[i] = mmv[i] / vn;
  }
  return jacobi_spectral_radius(m, n);
}

AngleErrorBound angle_to_error_bound(double theta, unsigned k, double c1, double c3) {
  if (!(theta > 0.0 && theta <= std::numbers::pi / 4.0)) {
    fail(ErrorCode::kThetaOutOfRange, "angle bound: theta must be in (0, pi/4]");
  }
  if (k < 2 || k % 2 != 0) fail(ErrorCode::kOddK, "angle bound: k must be even and >= 2");
  require(c1 > 0.0 && c3 > 0.0, ErrorCode::kInvalidArgument, "angle bound: constants must be > 0");
  const double kk = static_cast<double>(k);
  const double t = std::tan(theta);
  // Tail term numerator (C1 k)^{k/2} tan^k, formed in logs.
  const double log_a = 0.5 * kk * std::log(c1 * kk) + kk * std::log(t);
  auto bound_at = [&](double sigma) {
    return c3 * sigma + std::exp(log_a - kk * std::log(sigma));
  };
  AngleErrorBound out;
  out.sigma_opt = std::exp(log_a / (kk + 1.0));
  out.bound = bound_at(out.sigma_opt);
  out.sigma_min = std::exp((std::log(kk / c3) + log_a) / (kk + 1.0));
  out.bound_min = bound_at(out.sigma_min);
  return out;
}

}  // namespace tlhs
