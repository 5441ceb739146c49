#include "tlhs/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tlhs {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSizeLimit: return "SizeLimit";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kNonPositiveStep: return "NonPositiveStep";
    case ErrorCode::kOddK: return "OddK";
    case ErrorCode::kInsufficientBandSamples: return "InsufficientBandSamples";
    case ErrorCode::kThetaOutOfRange: return "ThetaOutOfRange";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kEmptyCandidateList: return "EmptyCandidateList";
    case ErrorCode::kModeMismatch: return "ModeMismatch";
    case ErrorCode::kWrongDimension: return "WrongDimension";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

double norm2(std::span<const double> v) {
  // Scaled accumulation so that tiny or huge inputs do not under/overflow.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : v) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

UnitVector::UnitVector(Vec coords) : coords_(std::move(coords)) {
  require(coords_.size() >= 2, ErrorCode::kInvalidArgument, "UnitVector: dimension must be >= 2");
  const double n = norm2(coords_);
  if (!(std::abs(n - 1.0) <= 1e-12)) {
    fail(ErrorCode::kInvalidArgument,
         "UnitVector: norm " + std::to_string(n) + " is not 1");
  }
}

UnitVector UnitVector::operator-() const {
  Vec c = coords_;
  for (double& x : c) x = -x;
  return UnitVector(std::move(c));
}

UnitVector UnitVector::basis(std::size_t d, std::size_t axis) {
  require(axis < d, ErrorCode::kInvalidArgument, "basis: axis out of range");
  Vec c(d, 0.0);
  c[axis] = 1.0;
  return UnitVector(std::move(c));
}

LabeledDataset::LabeledDataset(std::size_t d, Vec points, std::vector<int> labels)
    : d_(d), points_(std::move(points)), labels_(std::move(labels)) {
  require(d_ >= 1, ErrorCode::kInvalidArgument, "dataset: dimension must be >= 1");
  require(!labels_.empty(), ErrorCode::kEmptyDataset, "dataset: no samples");
  require(points_.size() == labels_.size() * d_, ErrorCode::kDimensionMismatch,
          "dataset: points and labels disagree in length");
  for (int y : labels_) {
    require(y == 1 || y == -1, ErrorCode::kInvalidArgument, "dataset: labels must be -1 or +1");
  }
  for (double x : points_) {
    require(std::isfinite(x), ErrorCode::kInvalidArgument, "dataset: non-finite coordinate");
  }
}

LabeledDataset LabeledDataset::with_labels(std::vector<int> labels) const {
  return LabeledDataset(d_, points_, std::move(labels));
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  Vec pts;
  pts.reserve(rows.size() * d_);
  std::vector<int> ys;
  ys.reserve(rows.size());
  for (std::size_t r : rows) {
    require(r < size(), ErrorCode::kInvalidArgument, "subset: row out of range");
    auto p = point(r);
    pts.insert(pts.end(), p.begin(), p.end());
    ys.push_back(labels_[r]);
  }
  return LabeledDataset(d_, std::move(pts), std::move(ys));
}

MultiIndex::MultiIndex(std::vector<unsigned> e) : exponents(std::move(e)) {
  for (unsigned a : exponents) degree += a;
}

double MultiIndex::monomial(std::span<const double> x) const {
  double m = 1.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    for (unsigned p = 0; p < exponents[i]; ++p) m *= x[i];
  }
  return m;
}

std::size_t multi_index_count(std::size_t d, unsigned k) {
  // binomial(d + k - 1, k) computed incrementally; each prefix is itself a
  // binomial coefficient so the division is exact.
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t c = 1;
  for (unsigned j = 1; j <= k; ++j) {
    const std::size_t num = d - 1 + j;
    if (c > kMax / num) return kMax;
    c = c * num / j;
  }
  return c;
}

namespace {

void enumerate_into(std::vector<unsigned>& prefix, std::size_t pos, unsigned remaining,
                    std::vector<MultiIndex>& out) {
  const std::size_t d = prefix.size();
  if (pos + 1 == d) {
    prefix[pos] = remaining;
    out.emplace_back(prefix);
    return;
  }
  for (unsigned a = remaining + 1; a-- > 0;) {
    prefix[pos] = a;
    enumerate_into(prefix, pos + 1, remaining - a, out);
  }
  prefix[pos] = 0;
}

}  // namespace

std::vector<MultiIndex> enumerate_multi_indices(std::size_t d, unsigned k,
                                                std::size_t size_limit) {
  require(d >= 1, ErrorCode::kInvalidArgument, "enumerate_multi_indices: d must be >= 1");
  const std::size_t count = multi_index_count(d, k);
  if (count > size_limit) {
    fail(ErrorCode::kSizeLimit, "enumerate_multi_indices: " + std::to_string(count) +
                                    " indices exceed the limit of " + std::to_string(size_limit));
  }
  std::vector<MultiIndex> out;
  out.reserve(count);
  std::vector<unsigned> prefix(d, 0);
  enumerate_into(prefix, 0, k, out);
  return out;
}

UnitVector project_to_sphere(std::span<const double> v) {
  const double n = norm2(v);
  if (!(n >= 1e-300) || !std::isfinite(n)) {
    fail(ErrorCode::kZeroVector, "project_to_sphere: vector has no usable norm");
  }
  Vec c(v.begin(), v.end());
  for (double& x : c) x /= n;
  // One more pass pulls the norm to within rounding of 1.
  const double m = norm2(c);
  for (double& x : c) x /= m;
  return UnitVector(std::move(c));
}

double angle_between(const UnitVector& u, const UnitVector& v) {
  require(u.dim() == v.dim(), ErrorCode::kDimensionMismatch, "angle_between: dimension mismatch");
  return std::acos(std::clamp(dot(u.coords(), v.coords()), -1.0, 1.0));
}

Vec tangential_component(std::span<const double> x, const UnitVector& w) {
  require(x.size() == w.dim(), ErrorCode::kDimensionMismatch,
          "tangential_component: dimension mismatch");
  const double p = dot(x, w.coords());
  Vec r(x.begin(), x.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= p * w[i];
  return r;
}

std::vector<Vec> orthogonal_basis(const UnitVector& w) {
  // Gram-Schmidt over the standard basis, starting with the axes least
  // aligned with w.
  const std::size_t d = w.dim();
  std::vector<std::size_t> axes(d);
  for (std::size_t i = 0; i < d; ++i) axes[i] = i;
  std::stable_sort(axes.begin(), axes.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(w[a]) < std::abs(w[b]);
  });
  std::vector<Vec> basis;
  basis.reserve(d - 1);
  for (std::size_t axis : axes) {
    if (basis.size() + 1 == d) break;
    Vec e(d, 0.0);
    e[axis] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      const double pw = dot(e, w.coords());
      for (std::size_t i = 0; i < d; ++i) e[i] -= pw * w[i];
      for (const Vec& b : basis) {
        const double pb = dot(e, b);
        for (std::size_t i = 0; i < d; ++i) e[i] -= pb * b[i];
      }
    }
    const double n = norm2(e);
    if (n < 1e-8) continue;
    for (double& x : e) x /= n;
    basis.push_back(std::move(e));
  }
  return basis;
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(RngSeed seed) : key_(mix64(seed.value ^ 0x6A09E667F3BCC909ULL)) {}

Rng::Rng(std::uint64_t key, int) : key_(key) {}

Rng::result_type Rng::operator()() {
  return mix64(key_ + kGolden * ++counter_);
}

Rng Rng::split(std::uint64_t id) const {
  return Rng(mix64(key_ ^ mix64(id * kGolden + 0xD1B54A32D192ED03ULL)), 0);
}

double Rng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return gauss_(*this); }

std::size_t Rng::index(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(*this);
}

UnitVector random_unit_vector(std::size_t d, Rng& rng) {
  Vec v(d);
  for (;;) {
    for (double& x : v) x = rng.normal();
    if (norm2(v) > 1e-12) return project_to_sphere(v);
  }
}

}  // namespace tlhs
