#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tlhs/error.hpp"

namespace tlhs {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::kDimensionMismatch, "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
double norm2(std::span<const double> v);

/// A direction on the unit sphere S^{d-1}, d >= 2.
class UnitVector {
 public:
  /// Wraps coordinates that are already unit norm (checked to 1e-12).
  explicit UnitVector(Vec coords);

  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const noexcept { return coords_[i]; }
  UnitVector operator-() const;

  /// Standard basis vector e_axis in R^d.
  static UnitVector basis(std::size_t d, std::size_t axis);

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  Vec coords_;
};

/// Labeled sample: n points in R^d stored row-major, labels in {-1, +1}.
class LabeledDataset {
 public:
  LabeledDataset(std::size_t d, Vec points, std::vector<int> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return d_; }
  std::span<const double> point(std::size_t i) const noexcept {
    return {points_.data() + i * d_, d_};
  }
  int label(std::size_t i) const noexcept { return labels_[i]; }
  std::span<const double> points() const noexcept { return points_; }
  std::span<const int> labels() const noexcept { return labels_; }

  LabeledDataset with_labels(std::vector<int> labels) const;
  /// Rows selected by index, in the given order.
  LabeledDataset subset(std::span<const std::size_t> rows) const;

 private:
  std::size_t d_;
  Vec points_;
  std::vector<int> labels_;
};

struct MultiIndex {
  std::vector<unsigned> exponents;
  unsigned degree = 0;

  explicit MultiIndex(std::vector<unsigned> e);
  std::size_t dim() const noexcept { return exponents.size(); }
  /// x^alpha = prod_i x_i^{alpha_i}.
  double monomial(std::span<const double> x) const;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) {
    return a.exponents <=> b.exponents;
  }
};

inline constexpr std::size_t kDefaultSizeLimit = 2'000'000;

/// binomial(d + k - 1, k), saturating at SIZE_MAX.
std::size_t multi_index_count(std::size_t d, unsigned k);

/// All multi-indices of total degree exactly k, lexicographically descending
/// in the first coordinate: (2,0), (1,1), (0,2).
std::vector<MultiIndex> enumerate_multi_indices(
    std::size_t d, unsigned k, std::size_t size_limit = kDefaultSizeLimit);

UnitVector project_to_sphere(std::span<const double> v);
double angle_between(const UnitVector& u, const UnitVector& v);
/// x - <w,x> w.
Vec tangential_component(std::span<const double> x, const UnitVector& w);

/// Orthonormal basis of the complement of w, as d-1 rows of length d.
std::vector<Vec> orthogonal_basis(const UnitVector& w);

struct RngSeed {
  std::uint64_t value = 0;
};

/// Counter-based generator: output i of a stream is a keyed hash of i, so
/// streams can be split by index without coordination.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(RngSeed seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  /// Independent child stream for the given id.
  Rng split(std::uint64_t id) const;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();
  std::size_t index(std::size_t n);

 private:
  Rng(std::uint64_t key, int);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

UnitVector random_unit_vector(std::size_t d, Rng& rng);

/// Sign with the sign(0) = +1 convention.
inline int halfspace_sign(double margin) noexcept { return margin >= 0.0 ? 1 : -1; }

}  // namespace tlhs
