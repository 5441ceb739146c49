#include "tlhs/surrogate.hpp"

#include <algorithm>
#include <cmath>

namespace tlhs {

Ramp::Ramp(SurrogateParams p) : sigma_(p.sigma) {
  require(sigma_ > 0.0 && std::isfinite(sigma_), ErrorCode::kInvalidArgument,
          "ramp: sigma must be positive");
  a1_ = -9.0 / (sigma_ * sigma_ * sigma_);
  a2_ = 15.0 / (2.0 * sigma_ * sigma_);
  a3_ = -3.0 / (4.0 * sigma_);
  a4_ = 5.0 / 8.0;
}

double Ramp::cubic(double t) const noexcept {
  return ((a1_ * t + a2_) * t + a3_) * t + a4_;
}

double Ramp::cubic_slope(double t) const noexcept {
  return (3.0 * a1_ * t + 2.0 * a2_) * t + a3_;
}

double Ramp::value(double t) const noexcept {
  const double a = std::abs(t);
  if (a <= sigma_ / 6.0) return t / sigma_ + 0.5;
  if (t > sigma_ / 2.0) return 1.0;
  if (t < -sigma_ / 2.0) return 0.0;
  // Clamped so rounding never leaves [0, 1] next to the outer knots.
  return t > 0.0 ? std::min(1.0, cubic(t)) : std::max(0.0, 1.0 - cubic(-t));
}

double Ramp::derivative(double t) const noexcept {
  const double a = std::abs(t);
  if (a <= sigma_ / 6.0) return 1.0 / sigma_;
  if (a > sigma_ / 2.0) return 0.0;
  return cubic_slope(a);
}

double Ramp::second_derivative(double t) const noexcept {
  const double a = std::abs(t);
  if (a <= sigma_ / 6.0 || a > sigma_ / 2.0) return 0.0;
  const double c = 6.0 * a1_ * a + 2.0 * a2_;
  return t > 0.0 ? c : -c;
}

double ramp_value(double t, SurrogateParams p) { return Ramp(p).value(t); }

double ramp_derivative(double t, SurrogateParams p) { return Ramp(p).derivative(t); }

double empirical_surrogate_loss(const LabeledDataset& s, const UnitVector& w, SurrogateParams p) {
  require(s.dim() == w.dim(), ErrorCode::kDimensionMismatch, "surrogate loss: dimension mismatch");
  const Ramp ramp(p);
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += ramp.value(-s.label(i) * dot(s.point(i), w.coords()));
  }
  return total / static_cast<double>(s.size());
}

Vec surrogate_gradient_rows(const LabeledDataset& s, std::span<const std::size_t> rows,
                            const UnitVector& w, const Ramp& ramp) {
  require(s.dim() == w.dim(), ErrorCode::kDimensionMismatch,
          "surrogate gradient: dimension mismatch");
  const std::size_t d = s.dim();
  const double band = ramp.sigma() / 2.0;
  // Accumulate sum c_i x_i and sum c_i <w,x_i> separately, then project once.
  Vec g(d, 0.0);
  double along = 0.0;
  for (std::size_t r : rows) {
    auto x = s.point(r);
    const double m = dot(x, w.coords());
    if (std::abs(m) > band) continue;
    const double c = -ramp.derivative(std::abs(m)) * s.label(r);
    for (std::size_t j = 0; j < d; ++j) g[j] += c * x[j];
    along += c * m;
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t j = 0; j < d; ++j) g[j] = (g[j] - along * w[j]) * inv;
  return g;
}

Vec empirical_surrogate_gradient(const LabeledDataset& s, const UnitVector& w, SurrogateParams p) {
  const Ramp ramp(p);
  std::vector<std::size_t> rows(s.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return surrogate_gradient_rows(s, rows, w, ramp);
}

}  // namespace tlhs
