#include "tlhs/datagen.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace tlhs {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kMaxTilt = 20.0;

// int_0^inf exp(-x^2/2 - lambda x) dx = e^{lambda^2/2} sqrt(2 pi) Q(lambda).
double tilt_partition_half(double lambda) {
  return std::exp(0.5 * lambda * lambda) * std::sqrt(2.0 * std::numbers::pi) * 0.5 *
         std::erfc(lambda / std::numbers::sqrt2);
}

// int_0^inf x^a exp(-x^2/2 - lambda x) dx / I0, by quadrature; the closed
// forms in lambda cancel badly once lambda is large.
double tilt_half_moment(unsigned a, double lambda) {
  if (a == 0) return 1.0;
  auto f = [a, lambda](double x) { return std::pow(x, a) * std::exp(-0.5 * x * x - lambda * x); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
             f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-15) /
         tilt_partition_half(lambda);
}

// Draw from density proportional to exp(-x^2/2 - lambda |x|) by rejection
// against N(0,1); the acceptance ratio is exp(-lambda |x|).
double draw_tilted(double lambda, Rng& proposals, Rng& accepts) {
  for (;;) {
    const double g = proposals.normal();
    if (lambda == 0.0 || accepts.uniform() < std::exp(-lambda * std::abs(g))) return g;
  }
}

}  // namespace

void MarginalSpec::validate() const {
  require(d >= 2, ErrorCode::kInvalidArgument, "marginal: d must be >= 2");
  std::visit(Overloaded{
                 [](const StandardGaussian&) {},
                 [this](const AnisoGaussian& a) {
                   require(a.scales.size() == d, ErrorCode::kDimensionMismatch,
                           "aniso_gaussian: need one scale per coordinate");
                   for (double s : a.scales) {
                     require(s > 0.0 && std::isfinite(s), ErrorCode::kInvalidArgument,
                             "aniso_gaussian: scales must be positive");
                   }
                 },
                 [](const StudentT& t) {
                   require(t.dof > 2.0 && std::isfinite(t.dof), ErrorCode::kInvalidArgument,
                           "student_t: dof must exceed 2");
                 },
                 [](const SlcExpTilt& t) {
                   require(t.lambda >= 0.0 && t.lambda <= kMaxTilt, ErrorCode::kInvalidArgument,
                           "slc_exp_tilt: lambda must be in [0, 20]");
                 },
                 [this](const PlanarMixture& p) {
                   require(p.weight >= 0.0 && p.weight <= 1.0, ErrorCode::kInvalidArgument,
                           "planar_mixture: weight must be in [0,1]");
                   require(p.normal.size() == d, ErrorCode::kDimensionMismatch,
                           "planar_mixture: normal dimension mismatch");
                 },
             },
             kind);
}

double slc_tilt_scale(double lambda) {
  require(lambda >= 0.0 && lambda <= kMaxTilt, ErrorCode::kInvalidArgument,
          "slc_exp_tilt: lambda must be in [0, 20]");
  return std::sqrt(tilt_half_moment(2, lambda));
}

LabeledDataset sample_marginal(const MarginalSpec& spec, std::size_t n, RngSeed seed) {
  spec.validate();
  require(n >= 1, ErrorCode::kEmptyDataset, "sample_marginal: n must be >= 1");
  const std::size_t d = spec.d;
  const Rng base(seed);
  Vec points(n * d);

  double tilt_scale = 1.0;
  PlanarMixture planar;
  if (const auto* t = std::get_if<SlcExpTilt>(&spec.kind)) tilt_scale = slc_tilt_scale(t->lambda);
  if (const auto* p = std::get_if<PlanarMixture>(&spec.kind)) {
    planar = *p;
    const auto u = project_to_sphere(p->normal);
    planar.normal.assign(u.coords().begin(), u.coords().end());
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Rng row = base.split(i);
    Rng normals = row.split(0);
    Rng aux = row.split(1);
    std::span<double> x(points.data() + i * d, d);
    std::visit(Overloaded{
                   [&](const StandardGaussian&) {
                     for (double& v : x) v = normals.normal();
                   },
                   [&](const AnisoGaussian& a) {
                     for (std::size_t j = 0; j < d; ++j) x[j] = a.scales[j] * normals.normal();
                   },
                   [&](const StudentT& t) {
                     for (double& v : x) v = normals.normal();
                     const double chi2 =
                         2.0 * std::gamma_distribution<double>(t.dof / 2.0, 1.0)(aux);
                     const double f = std::sqrt((t.dof - 2.0) / chi2);
                     for (double& v : x) v *= f;
                   },
                   [&](const SlcExpTilt& t) {
                     for (double& v : x) v = draw_tilted(t.lambda, normals, aux) / tilt_scale;
                   },
                   [&](const PlanarMixture&) {
                     for (double& v : x) v = normals.normal();
                     if (aux.uniform() < planar.weight) {
                       const double m = dot(x, planar.normal);
                       for (std::size_t j = 0; j < d; ++j) x[j] -= m * planar.normal[j];
                     }
                   },
               },
               spec.kind);
  }
  return LabeledDataset(d, std::move(points), std::vector<int>(n, 1));
}

TargetMarginal slc_tilt_target(std::size_t d, double lambda) {
  require(d >= 2, ErrorCode::kInvalidArgument, "slc target: d must be >= 2");
  const double scale = slc_tilt_scale(lambda);
  const double i0 = tilt_partition_half(lambda);
  auto coordinate_moments = std::make_shared<Vec>(Vec{1.0});
  auto coordinate_moment = [coordinate_moments, lambda, scale](unsigned a) {
    Vec& r = *coordinate_moments;
    while (r.size() <= a) r.push_back(tilt_half_moment(static_cast<unsigned>(r.size()), lambda));
    return a % 2 == 1 ? 0.0 : r[a] / std::pow(scale, a);
  };
  auto moments = [coordinate_moment, d](const MultiIndex& alpha) {
    require(alpha.dim() == d, ErrorCode::kDimensionMismatch, "slc target: dimension mismatch");
    double m = 1.0;
    for (unsigned a : alpha.exponents) m *= coordinate_moment(a);
    return m;
  };
  // Band mass along a coordinate axis, 1 - Q(sigma s + lambda) / Q(lambda),
  // formed from upper tails to avoid cancellation for large lambda.
  auto band = [lambda, scale](double sigma) {
    const double q = std::erfc(lambda / std::numbers::sqrt2);
    return (q - std::erfc((sigma * scale + lambda) / std::numbers::sqrt2)) / q;
  };
  auto density = [lambda, scale, i0](double u) {
    const double x = std::abs(u) * scale;
    return scale * std::exp(-0.5 * x * x - lambda * x) / (2.0 * i0);
  };
  auto sampler = [lambda, scale](Rng& rng, std::span<double> x) {
    Rng proposals = rng.split(rng());
    Rng accepts = rng.split(rng());
    for (double& v : x) v = draw_tilted(lambda, proposals, accepts) / scale;
  };
  return TargetMarginal::custom(moments, band, 2.0 * density(1.0), 2.0 * density(0.0), sampler);
}

void NoiseSpec::validate() const {
  auto rate = [](double r, double hi, bool open, const char* what) {
    const bool ok = r >= 0.0 && (open ? r < hi : r <= hi);
    require(ok, ErrorCode::kInvalidArgument, what);
  };
  std::visit(Overloaded{
                 [&](const MassartConstant& m) {
                   rate(m.eta, 0.5, true, "massart: eta must be in [0, 0.5)");
                 },
                 [&](const MassartBoundary& m) {
                   rate(m.eta, 0.5, true, "massart: eta must be in [0, 0.5)");
                   require(m.width >= 0.0, ErrorCode::kInvalidArgument,
                           "massart_boundary: width must be >= 0");
                 },
                 [&](const AgnosticRandom& a) {
                   rate(a.opt, 0.5, false, "agnostic: opt must be in [0, 0.5]");
                 },
                 [&](const AgnosticBoundary& a) {
                   rate(a.opt, 0.5, false, "agnostic: opt must be in [0, 0.5]");
                 },
             },
             kind);
}

LabeledDataset apply_noise(const LabeledDataset& x, const NoiseSpec& spec, RngSeed seed) {
  spec.validate();
  require(x.dim() == spec.planted.dim(), ErrorCode::kDimensionMismatch,
          "apply_noise: planted vector dimension mismatch");
  const std::size_t n = x.size();
  std::vector<double> margins(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    margins[i] = dot(x.point(i), spec.planted.coords());
    labels[i] = halfspace_sign(margins[i]);
  }
  const Rng base(seed);
  auto flip_exact = [&](std::size_t count, const std::vector<std::size_t>& order) {
    for (std::size_t j = 0; j < count; ++j) labels[order[j]] = -labels[order[j]];
  };
  std::visit(Overloaded{
                 [&](const MassartConstant& m) {
                   for (std::size_t i = 0; i < n; ++i) {
                     if (base.split(i).uniform() < m.eta) labels[i] = -labels[i];
                   }
                 },
                 [&](const MassartBoundary& m) {
                   for (std::size_t i = 0; i < n; ++i) {
                     if (std::abs(margins[i]) <= m.width && base.split(i).uniform() < m.eta) {
                       labels[i] = -labels[i];
                     }
                   }
                 },
                 [&](const AgnosticRandom& a) {
                   const auto count = static_cast<std::size_t>(std::floor(a.opt * n));
                   std::vector<std::size_t> order(n);
                   std::iota(order.begin(), order.end(), 0);
                   Rng rng = base.split(0);
                   for (std::size_t j = 0; j < count; ++j) {
                     std::swap(order[j], order[j + rng.index(n - j)]);
                   }
                   flip_exact(count, order);
                 },
                 [&](const AgnosticBoundary& a) {
                   const auto count = static_cast<std::size_t>(std::floor(a.opt * n));
                   std::vector<std::size_t> order(n);
                   std::iota(order.begin(), order.end(), 0);
                   std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
                     return std::abs(margins[p]) < std::abs(margins[q]);
                   });
                   flip_exact(count, order);
                 },
             },
             spec.kind);
  return x.with_labels(std::move(labels));
}

Opt2d brute_force_opt_2d(const LabeledDataset& s) {
  if (s.dim() != 2) fail(ErrorCode::kWrongDimension, "brute_force_opt_2d: data must be 2-D");
  require(s.size() <= 100'000, ErrorCode::kInvalidArgument, "brute_force_opt_2d: n > 1e5");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const std::size_t n = s.size();

  auto error_at = [&](double phi) {
    const double c = std::cos(phi), sn = std::sin(phi);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto x = s.point(i);
      if (halfspace_sign(c * x[0] + sn * x[1]) != s.label(i)) ++wrong;
    }
    return wrong;
  };

  // A sample at angle a is predicted +1 exactly for phi in (a - pi/2, a + pi/2).
  struct Event {
    double angle;
    std::size_t sample;
    bool enters;
  };
  std::vector<Event> events;
  events.reserve(2 * n);
  auto wrap = [&](double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
  };
  for (std::size_t i = 0; i < n; ++i) {
    auto x = s.point(i);
    if (x[0] == 0.0 && x[1] == 0.0) continue;
    const double a = std::atan2(x[1], x[0]);
    events.push_back({wrap(a - std::numbers::pi / 2.0), i, true});
    events.push_back({wrap(a + std::numbers::pi / 2.0), i, false});
  }
  if (events.empty()) {
    return {static_cast<double>(error_at(0.0)) / static_cast<double>(n), UnitVector::basis(2, 0)};
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.angle < b.angle; });

  // Start in the middle of the widest event-free arc.
  const std::size_t m = events.size();
  std::size_t gap = m - 1;
  double widest = events[0].angle + kTwoPi - events[m - 1].angle;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double g = events[j + 1].angle - events[j].angle;
    if (g > widest) {
      widest = g;
      gap = j;
    }
  }
  const double start = events[gap].angle + widest / 2.0;
  std::size_t wrong = error_at(start);
  std::size_t best = wrong;
  double best_phi = start;

  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t j = (gap + 1 + step) % m;
    const Event& e = events[j];
    const bool positive_label = s.label(e.sample) == 1;
    // Entering the positive side fixes a +1 sample and breaks a -1 sample.
    if (e.enters == positive_label) {
      --wrong;
    } else {
      ++wrong;
    }
    const std::size_t next = (j + 1) % m;
    double width = events[next].angle - e.angle;
    if (next == 0) width += kTwoPi;
    if (step + 1 == m || width <= 0.0) continue;
    if (wrong < best) {
      best = wrong;
      best_phi = e.angle + width / 2.0;
    }
  }
  const double c = std::cos(best_phi), sn = std::sin(best_phi);
  auto direction = project_to_sphere(Vec{c, sn});
  const std::size_t recount = error_at(best_phi);
  return {static_cast<double>(std::min(recount, best)) / static_cast<double>(n),
          std::move(direction)};
}

}  // namespace tlhs
