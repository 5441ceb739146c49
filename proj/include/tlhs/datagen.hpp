#pragma once

#include <variant>

#include "tlhs/core.hpp"
#include "tlhs/testers.hpp"

namespace tlhs {

struct StandardGaussian {};
/// Coordinate i scaled by scales[i].
struct AnisoGaussian {
  Vec scales;
};
/// Multivariate Student-t with unit covariance: g * sqrt((dof - 2) / chi2_dof).
struct StudentT {
  double dof = 3.0;
};
/// Per-coordinate density proportional to exp(-x^2/2 - lambda |x|),
/// rescaled to unit variance.
struct SlcExpTilt {
  double lambda = 0.0;
};
/// Standard Gaussian where a `weight` fraction of the points is projected
/// onto the hyperplane orthogonal to `normal`.
struct PlanarMixture {
  double weight = 0.5;
  Vec normal;
};

struct MarginalSpec {
  std::variant<StandardGaussian, AnisoGaussian, StudentT, SlcExpTilt, PlanarMixture> kind;
  std::size_t d = 2;

  void validate() const;
};

/// n i.i.d. draws with placeholder +1 labels. Row i depends only on (seed, i).
LabeledDataset sample_marginal(const MarginalSpec& spec, std::size_t n, RngSeed seed);

/// Standard deviation of the untilted density exp(-x^2/2 - lambda |x|).
double slc_tilt_scale(double lambda);
/// Isotropic tilted product distribution as a tester target.
TargetMarginal slc_tilt_target(std::size_t d, double lambda);

struct MassartConstant {
  double eta = 0.0;
};
struct MassartBoundary {
  double eta = 0.0;
  double width = 0.0;
};
struct AgnosticRandom {
  double opt = 0.0;
};
struct AgnosticBoundary {
  double opt = 0.0;
};

struct NoiseSpec {
  std::variant<MassartConstant, MassartBoundary, AgnosticRandom, AgnosticBoundary> kind;
  UnitVector planted;

  void validate() const;
};

/// Labels sign(<w*, x>) followed by the noise process.
LabeledDataset apply_noise(const LabeledDataset& x, const NoiseSpec& spec, RngSeed seed);

struct Opt2d {
  double opt = 0.0;
  UnitVector direction;
};

/// Exact minimum empirical error over origin-centered halfspaces in the
/// plane, taken over directions in general position (no sample exactly on
/// the boundary).
Opt2d brute_force_opt_2d(const LabeledDataset& s);

}  // namespace tlhs
