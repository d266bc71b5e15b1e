#include "otstab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "otstab/error.hpp"
#include "otstab/parallel.hpp"

namespace otstab {
namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e
constexpr double kMinRadius = 1e-300;
constexpr double kMaxRelativeError = 2e-3;

struct Quad {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
Quad integrate(F&& f, double a, double b) {
  Quad q;
  if (!(b > a)) return q;
  q.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13,
                                                                           &q.error);
  return q;
}

// Fraction of directions w around A = e_1 with A + r w in the half ball
// {|x| <= 1, x_1 >= 0}: w_1 in [max(-1, -1/r), -r/2].
double half_ball_fraction(int d, double r) {
  return direction_fraction(d, std::max(-1.0, -1.0 / r), -0.5 * r);
}

bool in_half_ball(const Point& w, double r) {
  return w[0] <= -0.5 * r && r * w[0] >= -1.0;
}

void check_delta(int d, double delta) {
  if (!(delta > 0.0 && delta < d)) {
    throw Error(ErrorKind::domain, "poly blow-up exponent must lie in (0, d)");
  }
}

struct RadialLaw {
  double lo, hi, weight;
};

// The radial variable splits at 1/e: a sector carrying the singularity and a
// regular bulk reaching out to sqrt(2), the farthest point of the half ball.
std::array<RadialLaw, 2> radial_laws(DensityKind kind, double delta) {
  const double rmax = std::numbers::sqrt2;
  if (kind == DensityKind::log_blowup) {
    return {RadialLaw{0.0, kInvE, 1.0}, RadialLaw{kInvE, rmax, 1.0 + 0.5 * std::log(2.0)}};
  }
  const double a = std::exp(-delta);
  return {RadialLaw{0.0, kInvE, a / delta},
          RadialLaw{kInvE, rmax, (std::pow(2.0, 0.5 * delta) - a) / delta}};
}

double inverse_radius(DensityKind kind, double delta, int segment, double u) {
  if (kind == DensityKind::log_blowup) {
    if (segment == 0) return std::max(kMinRadius, std::exp(-1.0 / u));
    return std::exp(-1.0 + u * (1.0 + 0.5 * std::log(2.0)));
  }
  if (segment == 0) return std::max(kMinRadius, std::pow(u, 1.0 / delta) * kInvE);
  const double a = std::exp(-delta);
  const double b = std::pow(2.0, 0.5 * delta);
  return std::pow(a + u * (b - a), 1.0 / delta);
}

// Integral of the direction fraction against the radial law of a segment,
// in coordinates where the radial law is flat.
Quad segment_mass_quadrature(DensityKind kind, int d, double delta, int segment) {
  if (kind == DensityKind::log_blowup) {
    if (segment == 0) {
      return integrate([d](double t) { return half_ball_fraction(d, std::exp(-1.0 / t)); }, 0.0,
                       1.0);
    }
    auto f = [d](double s) { return half_ball_fraction(d, std::exp(s)); };
    const Quad a = integrate(f, -1.0, 0.0);
    const Quad b = integrate(f, 0.0, 0.5 * std::log(2.0));
    return {a.value + b.value, a.error + b.error};
  }
  if (segment == 0) {
    const Quad q = integrate(
        [d, delta](double v) { return half_ball_fraction(d, std::pow(v, 1.0 / delta)); }, 0.0,
        std::exp(-delta));
    return {q.value / delta, q.error / delta};
  }
  auto f = [d, delta](double r) { return half_ball_fraction(d, r) * std::pow(r, delta - 1.0); };
  const Quad a = integrate(f, kInvE, 1.0);
  const Quad b = integrate(f, 1.0, std::numbers::sqrt2);
  return {a.value + b.value, a.error + b.error};
}

void check_blowup(DensityKind kind, int d, double delta) {
  check_dimension(d);
  if (kind == DensityKind::poly_blowup) {
    check_delta(d, delta);
  } else if (kind != DensityKind::log_blowup) {
    throw Error(ErrorKind::unsupported_kind, "normalization applies to blow-up kinds only");
  }
}

}  // namespace

std::string_view to_string(DensityKind k) {
  switch (k) {
    case DensityKind::log_blowup: return "log_blowup";
    case DensityKind::poly_blowup: return "poly_blowup";
    case DensityKind::uniform_cell_union: return "uniform_cell_union";
    case DensityKind::uniform_ball: return "uniform_ball";
  }
  return "unknown";
}

DensityKind density_kind_from_string(std::string_view s) {
  for (auto k : {DensityKind::log_blowup, DensityKind::poly_blowup,
                 DensityKind::uniform_cell_union, DensityKind::uniform_ball}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorKind::unsupported_kind, "unknown density kind '" + std::string(s) + "'");
}

double radial_profile(DensityKind kind, int d, double r, double delta) {
  if (!(r > 0.0)) throw Error(ErrorKind::domain, "radial profile needs r > 0");
  switch (kind) {
    case DensityKind::log_blowup: {
      const double l = std::log(r);
      const double factor = r < kInvE ? 1.0 / (l * l) : 1.0;
      return std::pow(r, -d) * factor;
    }
    case DensityKind::poly_blowup:
      return std::pow(r, -d + delta);
    default:
      throw Error(ErrorKind::unsupported_kind, "radial profile is defined for blow-up kinds only");
  }
}

Normalization normalize(DensityKind kind, int d, double delta, Method method, std::size_t budget,
                        SamplerState state) {
  check_blowup(kind, d, delta);
  const double scale = 2.0 * sphere_area(d);
  Normalization out;
  if (method == Method::quadrature) {
    double value = 0.0;
    double error = 0.0;
    for (int seg = 0; seg < 2; ++seg) {
      const Quad q = segment_mass_quadrature(kind, d, delta, seg);
      value += q.value;
      error += q.error;
    }
    out.integral = Estimate{scale * value, scale * error, Method::quadrature, 0};
  } else if (method == Method::monte_carlo) {
    if (budget < 100'000) throw Error(ErrorKind::domain, "normalization budget must be >= 1e5");
    const auto laws = radial_laws(kind, delta);
    std::array<std::array<RunningMoments, 2>, kShards> parts{};
    for_each_shard(kShards, [&](std::size_t s) {
      Rng rng(state.seed, derive_counter(state.counter, s));
      const std::size_t n = shard_size(budget, kShards, s);
      for (std::size_t k = 0; k < n; ++k) {
        const int seg = static_cast<int>(k & 1u);
        const double r = inverse_radius(kind, delta, seg, rng.open_uniform());
        const Point w = random_direction(rng, d);
        parts[s][seg].add(in_half_ball(w, r) ? 1.0 : 0.0);
      }
    });
    double value = 0.0;
    double var = 0.0;
    for (int seg = 0; seg < 2; ++seg) {
      RunningMoments m;
      for (const auto& p : parts) m.merge(p[seg]);
      const double w = scale * laws[seg].weight;
      value += w * m.mean();
      var += std::pow(w * m.standard_error(), 2);
    }
    out.integral = Estimate{value, std::sqrt(var), Method::monte_carlo, budget};
  } else {
    throw Error(ErrorKind::unsupported_method, "normalization uses quadrature or monte-carlo");
  }
  if (!(out.integral.value > 0.0) ||
      out.integral.standard_error > kMaxRelativeError * out.integral.value) {
    throw Error(ErrorKind::precision, "normalization integral did not reach 2e-3 relative error");
  }
  out.c0 = 1.0 / out.integral.value;
  return out;
}

Point random_direction(Rng& rng, int d) {
  Point w = Point::zero(d);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (int k = 0; k < d; ++k) {
      w[k] = rng.normal();
      n2 += w[k] * w[k];
    }
  } while (n2 < 1e-300);
  w *= 1.0 / std::sqrt(n2);
  return w;
}

Point reflect(const Point& x, std::uint32_t mask) {
  Point y = x;
  for (int k = 0; k < x.dim(); ++k) {
    if (mask & (1u << k)) y[k] = -y[k];
  }
  return y;
}

void check_acceptance(std::size_t accepted, std::size_t attempts) {
  if (attempts >= 10'000 && static_cast<double>(accepted) < 1e-3 * static_cast<double>(attempts)) {
    throw Error(ErrorKind::sampler_degenerate,
                "rejection sampler acceptance rate fell below 1e-3");
  }
}

SourceDensity SourceDensity::log_blowup(int d) {
  check_dimension(d);
  SourceDensity rho;
  rho.kind_ = DensityKind::log_blowup;
  rho.d_ = d;
  rho.c0_ = normalize(DensityKind::log_blowup, d, 0.0, Method::quadrature).c0;
  const auto laws = radial_laws(rho.kind_, 0.0);
  for (int seg = 0; seg < 2; ++seg) {
    rho.segments_.push_back({laws[seg].lo, laws[seg].hi, laws[seg].weight,
                             segment_mass_quadrature(rho.kind_, d, 0.0, seg).value});
  }
  return rho;
}

SourceDensity SourceDensity::poly_blowup(int d, double delta) {
  check_dimension(d);
  check_delta(d, delta);
  SourceDensity rho;
  rho.kind_ = DensityKind::poly_blowup;
  rho.d_ = d;
  rho.delta_ = delta;
  rho.c0_ = normalize(DensityKind::poly_blowup, d, delta, Method::quadrature).c0;
  const auto laws = radial_laws(rho.kind_, delta);
  for (int seg = 0; seg < 2; ++seg) {
    rho.segments_.push_back({laws[seg].lo, laws[seg].hi, laws[seg].weight,
                             segment_mass_quadrature(rho.kind_, d, delta, seg).value});
  }
  return rho;
}

SourceDensity SourceDensity::uniform_ball(int d) {
  check_dimension(d);
  SourceDensity rho;
  rho.kind_ = DensityKind::uniform_ball;
  rho.d_ = d;
  rho.c0_ = 1.0 / ball_volume(d);
  return rho;
}

SourceDensity SourceDensity::uniform_cells(int d, std::vector<Box> boxes) {
  check_dimension(d);
  if (boxes.empty()) throw Error(ErrorKind::domain, "cell union needs at least one box");
  SourceDensity rho;
  rho.kind_ = DensityKind::uniform_cell_union;
  rho.d_ = d;
  double total = 0.0;
  for (const Box& b : boxes) {
    if (b.anchor.dim() != d) throw Error(ErrorKind::invalid_dimension, "box dimension mismatch");
    total += b.volume();
  }
  rho.c0_ = 1.0 / total;
  double acc = 0.0;
  for (const Box& b : boxes) {
    rho.box_masses_.push_back(b.volume() / total);
    acc += b.volume() / total;
    rho.box_cumulative_.push_back(acc);
  }
  rho.box_cumulative_.back() = 1.0;
  rho.boxes_ = std::move(boxes);
  return rho;
}

std::array<Point, 2> SourceDensity::singular_points() const {
  if (!is_blowup()) throw Error(ErrorKind::unsupported_kind, "density has no singular points");
  return {Point::unit(d_, 0), -Point::unit(d_, 0)};
}

double SourceDensity::operator()(const Point& x) const {
  if (x.dim() != d_) throw Error(ErrorKind::invalid_dimension, "point dimension mismatch");
  switch (kind_) {
    case DensityKind::uniform_ball:
      return dot(x, x) <= 1.0 ? c0_ : 0.0;
    case DensityKind::uniform_cell_union:
      for (const Box& b : boxes_) {
        if (in_box(x, b)) return c0_;
      }
      return 0.0;
    default: {
      if (dot(x, x) > 1.0) return 0.0;
      const auto [a, a2] = singular_points();
      const double r = std::min(distance(x, a), distance(x, a2));
      return c0_ * radial_profile(kind_, d_, r, delta_);
    }
  }
}

double SourceDensity::sample_radius(const Segment& seg, double u) const {
  const int index = seg.lo == 0.0 ? 0 : 1;
  return inverse_radius(kind_, delta_, index, u);
}

Point SourceDensity::draw(Rng& rng, std::size_t* attempts) const {
  switch (kind_) {
    case DensityKind::uniform_ball: {
      Point w = random_direction(rng, d_);
      w *= std::pow(rng.uniform(), 1.0 / d_);
      if (attempts) ++*attempts;
      return w;
    }
    case DensityKind::uniform_cell_union: {
      const double u = rng.uniform();
      const auto it = std::upper_bound(box_cumulative_.begin(), box_cumulative_.end(), u);
      const Box& b = boxes_[std::min<std::size_t>(it - box_cumulative_.begin(), boxes_.size() - 1)];
      Point x = Point::zero(d_);
      for (;;) {
        if (attempts) ++*attempts;
        for (int k = 0; k < d_; ++k) x[k] = b.lower(k) + rng.uniform() * (b.upper(k) - b.lower(k));
        if (in_box(x, b)) return x;
      }
    }
    default: {
      const double total = segments_[0].mass + segments_[1].mass;
      const Segment& seg = rng.uniform() * total < segments_[0].mass ? segments_[0] : segments_[1];
      const bool mirrored = rng.coin();
      for (std::size_t trial = 0;; ++trial) {
        if (attempts) ++*attempts;
        if (trial > 10'000'000) {
          throw Error(ErrorKind::sampler_degenerate, "radial rejection sampler stalled");
        }
        const double r = sample_radius(seg, rng.open_uniform());
        const Point w = random_direction(rng, d_);
        if (!in_half_ball(w, r)) continue;
        Point x = Point::unit(d_, 0);
        for (int k = 0; k < d_; ++k) x[k] += r * w[k];
        return mirrored ? -x : x;
      }
    }
  }
}

std::vector<Point> SourceDensity::sample(SamplerState state, std::size_t n) const {
  std::vector<Point> out(n);
  std::array<std::size_t, kShards> offset{};
  for (std::size_t s = 1; s < kShards; ++s) offset[s] = offset[s - 1] + shard_size(n, kShards, s - 1);
  for_each_shard(kShards, [&](std::size_t s) {
    Rng rng(state.seed, derive_counter(state.counter, s));
    const std::size_t m = shard_size(n, kShards, s);
    std::size_t attempts = 0;
    for (std::size_t k = 0; k < m; ++k) out[offset[s] + k] = draw(rng, &attempts);
    check_acceptance(m, attempts);
  });
  return out;
}

Estimate SourceDensity::sector_mass(double s, double fraction) const {
  if (!(s > 0.0)) throw Error(ErrorKind::domain, "sector radius must be positive");
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::domain, "solid-angle fraction must lie in [0, 1]");
  }
  const double scale = c0_ * fraction * sphere_area(d_);
  if (kind_ == DensityKind::poly_blowup) {
    return Estimate{scale * std::pow(s, delta_) / delta_, 0.0, Method::closed_form, 0};
  }
  if (kind_ != DensityKind::log_blowup) {
    throw Error(ErrorKind::unsupported_kind, "sector mass is defined for blow-up kinds only");
  }
  if (s <= kInvE) return Estimate{scale / std::abs(std::log(s)), 0.0, Method::closed_form, 0};
  const int d = d_;
  const Quad q = integrate(
      [d](double r) { return radial_profile(DensityKind::log_blowup, d, r) * std::pow(r, d - 1); },
      kInvE, s);
  return Estimate{scale * (1.0 + q.value), scale * q.error, Method::quadrature, 0};
}

std::vector<std::uint32_t> SourceDensity::reflection_masks() const {
  if (kind_ != DensityKind::uniform_cell_union) return {0u, 1u, 2u, 3u};
  const bool axis_centred = std::all_of(boxes_.begin(), boxes_.end(),
                                        [](const Box& b) { return b.anchor[1] == 0.0; });
  if (axis_centred) return {0u, 2u};
  return {0u};
}

nlohmann::json to_json(const SourceDensity& rho) {
  nlohmann::json j{{"kind", std::string(to_string(rho.kind()))},
                   {"d", rho.dim()},
                   {"c0", rho.c0()}};
  if (rho.kind() == DensityKind::poly_blowup) j["delta"] = rho.delta();
  if (rho.kind() == DensityKind::uniform_cell_union) j["boxes"] = rho.boxes().size();
  return j;
}

SourceDensity density_from_json(const nlohmann::json& j) {
  try {
    const DensityKind kind = density_kind_from_string(j.at("kind").get<std::string>());
    const int d = j.value("d", 2);
    switch (kind) {
      case DensityKind::log_blowup: return SourceDensity::log_blowup(d);
      case DensityKind::poly_blowup: return SourceDensity::poly_blowup(d, j.at("delta").get<double>());
      case DensityKind::uniform_ball: return SourceDensity::uniform_ball(d);
      default:
        throw Error(ErrorKind::unsupported_kind, "cell unions are rebuilt from their instance");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("density JSON: ") + e.what());
  }
}

}  // namespace otstab
