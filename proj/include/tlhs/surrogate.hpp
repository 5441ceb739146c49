#pragma once

#include "tlhs/core.hpp"

namespace tlhs {

/// Slope scale of the smooth ramp. Pipelines use sigma in (0, 1]; any
/// sigma > 0 is accepted here.
struct SurrogateParams {
  double sigma = 1.0;
};

/// Piecewise linear/cubic C^1 ramp from 0 to 1.
///
///   t/sigma + 1/2                    |t| <= sigma/6
///   a1 t^3 + a2 t^2 + a3 t + a4      sigma/6 < t <= sigma/2
///   1 - ramp(-t)                     -sigma/2 <= t < -sigma/6
///   1 / 0                            t > sigma/2 / t < -sigma/2
///
/// with a1 = -9/sigma^3, a2 = 15/(2 sigma^2), a3 = -3/(4 sigma), a4 = 5/8.
class Ramp {
 public:
  explicit Ramp(SurrogateParams p);

  double sigma() const noexcept { return sigma_; }
  double value(double t) const noexcept;
  double derivative(double t) const noexcept;
  /// Second derivative of the piece containing t (one-sided at the knots).
  double second_derivative(double t) const noexcept;

 private:
  double cubic(double t) const noexcept;
  double cubic_slope(double t) const noexcept;

  double sigma_;
  double a1_, a2_, a3_, a4_;
};

double ramp_value(double t, SurrogateParams p);
double ramp_derivative(double t, SurrogateParams p);

/// (1/n) sum_i ramp(-y_i <w, x_i>).
double empirical_surrogate_loss(const LabeledDataset& s, const UnitVector& w, SurrogateParams p);

/// (1/n) sum_i -ramp'(|<w,x_i>|) y_i (x_i - <w,x_i> w); tangent to the sphere at w.
Vec empirical_surrogate_gradient(const LabeledDataset& s, const UnitVector& w, SurrogateParams p);

/// Same gradient restricted to the given rows (a minibatch).
Vec surrogate_gradient_rows(const LabeledDataset& s, std::span<const std::size_t> rows,
                            const UnitVector& w, const Ramp& ramp);

}  // namespace tlhs
