#pragma once

#include <doctest.h>

#include <algorithm>

#include "tlhs/datagen.hpp"
#include "tlhs/io.hpp"
#include "tlhs/optimizer.hpp"
#include "tlhs/pipeline.hpp"
#include "tlhs/requests.hpp"

namespace tlhs::test {

inline LabeledDataset gaussian(std::size_t d, std::size_t n, std::uint64_t seed) {
  return sample_marginal({StandardGaussian{}, d}, n, RngSeed{seed});
}

inline LabeledDataset labeled_by(const LabeledDataset& x, const UnitVector& w) {
  return apply_noise(x, {MassartConstant{0.0}, w}, RngSeed{0});
}

inline bool same(const UnitVector& a, const UnitVector& b) {
  return std::ranges::equal(a.coords(), b.coords());
}

inline UnitVector unit(Vec v) { return project_to_sphere(v); }

inline LabeledDataset from_rows(std::size_t d, std::initializer_list<std::pair<Vec, int>> rows) {
  Vec pts;
  std::vector<int> ys;
  for (const auto& [x, y] : rows) {
    pts.insert(pts.end(), x.begin(), x.end());
    ys.push_back(y);
  }
  return LabeledDataset(d, std::move(pts), std::move(ys));
}

/// Exception code thrown by fn, or nullopt-like sentinel 0.
template <class Fn>
int error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return static_cast<int>(e.code());
  }
  return 0;
}

#define CHECK_CODE(expr, code) \
  CHECK(::tlhs::test::error_code_of([&] { (void)(expr); }) == static_cast<int>(code))

}  // namespace tlhs::test
