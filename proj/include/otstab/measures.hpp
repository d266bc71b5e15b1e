#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "otstab/estimate.hpp"
#include "otstab/geometry.hpp"
#include "otstab/parallel.hpp"
#include "otstab/rng.hpp"

namespace otstab {

enum class DensityKind { log_blowup, poly_blowup, uniform_cell_union, uniform_ball };

std::string_view to_string(DensityKind k);
DensityKind density_kind_from_string(std::string_view s);

/// Radial profile of the blow-up kinds in dimension d:
///   log:  r^{-d} min(1, (log r)^{-2})
///   poly: r^{-d+delta}
/// Throws domain for r <= 0 and unsupported_kind for the uniform kinds.
double radial_profile(DensityKind kind, int d, double r, double delta = 0.0);

/// Result of normalizing a blow-up profile over the unit ball.
struct Normalization {
  double c0 = 0.0;
  Estimate integral;  ///< integral of the unnormalized profile
};

/// Computes c0 = 1 / integral over B(0,1) of profile(dist(x, {A, A'})).
/// Quadrature reduces the integral to 1-D radial integrals around A of the
/// solid-angle fraction of directions that stay in the half ball {x_1 >= 0}.
/// Monte Carlo samples the same radial variables and tests the ball
/// constraints on random directions, which keeps the estimator bounded.
/// `budget` is the Monte Carlo sample count (>= 1e5). Throws precision when
/// the relative error exceeds 2e-3.
Normalization normalize(DensityKind kind, int d, double delta, Method method,
                        std::size_t budget = 1'000'000, SamplerState state = {});

/// Absolutely continuous source measure.
class SourceDensity {
 public:
  static SourceDensity log_blowup(int d);
  /// Requires 0 < delta < d.
  static SourceDensity poly_blowup(int d, double delta);
  static SourceDensity uniform_ball(int d);
  /// Uniform measure on a disjoint union of boxes.
  static SourceDensity uniform_cells(int d, std::vector<Box> boxes);

  DensityKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return d_; }
  double delta() const noexcept { return delta_; }
  double c0() const noexcept { return c0_; }
  bool is_blowup() const noexcept {
    return kind_ == DensityKind::log_blowup || kind_ == DensityKind::poly_blowup;
  }

  /// A = e_1 and A' = -e_1. Throws unsupported_kind for the uniform kinds.
  std::array<Point, 2> singular_points() const;

  const std::vector<Box>& boxes() const noexcept { return boxes_; }
  /// Probability of each box (cell-union kind only).
  const std::vector<double>& box_masses() const noexcept { return box_masses_; }

  /// Density value at x. Throws domain at the singular points.
  double operator()(const Point& x) const;

  /// One exact draw. `attempts`, if given, accumulates rejection trials.
  Point draw(Rng& rng, std::size_t* attempts = nullptr) const;

  /// n i.i.d. draws split over kShards deterministic sub-streams.
  std::vector<Point> sample(SamplerState state, std::size_t n) const;

  /// Mass of the intersection of B(A', s) (equivalently B(A, s)) with a
  /// direction set of solid-angle fraction `fraction`, computed from the
  /// radial law alone. Closed form for the log kind when s <= 1/e and for
  /// the poly kind; the log kind falls back to quadrature above 1/e, which is
  /// signalled by method == quadrature.
  Estimate sector_mass(double s, double fraction) const;

  /// Coordinate sign flips (bit k negates x_k) that leave the density
  /// invariant, including the identity.
  std::vector<std::uint32_t> reflection_masks() const;

 private:
  struct Segment {
    double lo = 0.0;
    double hi = 0.0;
    double radial_weight = 0.0;  ///< integral of profile * r^{d-1} over [lo, hi]
    double mass = 0.0;           ///< same integral weighted by the direction fraction
  };

  SourceDensity() = default;
  double sample_radius(const Segment& seg, double u) const;

  DensityKind kind_ = DensityKind::log_blowup;
  int d_ = 2;
  double delta_ = 0.0;
  double c0_ = 0.0;
  std::vector<Segment> segments_;
  std::vector<Box> boxes_;
  std::vector<double> box_masses_;
  std::vector<double> box_cumulative_;
};

/// Reflects x by a mask from reflection_masks().
Point reflect(const Point& x, std::uint32_t mask);

/// Fails with sampler_degenerate when accepted / attempts < 1e-3 over at
/// least 1e4 attempts.
void check_acceptance(std::size_t accepted, std::size_t attempts);

/// Uniform direction on S^{d-1}.
Point random_direction(Rng& rng, int d);

/// Streams the same n draws as SourceDensity::sample without storing them:
/// fn(shard, x) is called from the worker owning `shard`.
template <class Fn>
void stream_samples(const SourceDensity& rho, SamplerState state, std::size_t n, Fn&& fn) {
  for_each_shard(kShards, [&](std::size_t s) {
    Rng rng(state.seed, derive_counter(state.counter, s));
    const std::size_t m = shard_size(n, kShards, s);
    std::size_t attempts = 0;
    for (std::size_t k = 0; k < m; ++k) fn(s, rho.draw(rng, &attempts));
    check_acceptance(m, attempts);
  });
}

/// JSON form {kind, d, delta, c0}. Reading back supports the blow-up and
/// ball kinds; cell unions are rebuilt from their instance.
nlohmann::json to_json(const SourceDensity& rho);
SourceDensity density_from_json(const nlohmann::json& j);

}  // namespace otstab
