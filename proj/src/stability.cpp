#include "otstab/stability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "otstab/discrete_ot.hpp"
#include "otstab/error.hpp"
#include "otstab/parallel.hpp"

namespace otstab {
namespace {

constexpr double kInvE = 0.36787944117144233;
constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
constexpr double kMaxTheta = 0.1;

bool same_instance(const CellInstance& a, const CellInstance& b) {
  return a.N == b.N && a.d == b.d && a.c0 == b.c0 && a.radius == b.radius &&
         a.length == b.length && a.offset == b.offset && a.center == b.center;
}

bool is_rotating(const TransportMap& m) { return m.oracle == OracleKind::rotating; }
bool is_cell_oracle(const TransportMap& m) {
  return (m.oracle == OracleKind::cell || m.oracle == OracleKind::perturbed) && m.cells;
}

double rotating_radius(const TransportMap& m) { return norm(m.target.measure.atom(0)); }

bool same_radius(const TransportMap& a, const TransportMap& b) {
  const double ra = rotating_radius(a), rb = rotating_radius(b);
  return std::abs(ra - rb) <= 1e-12 * std::max(ra, rb);
}

// Cell index moved by a cell-family oracle, 0 for the unperturbed map.
int moved_cell(const TransportMap& m) { return m.oracle == OracleKind::perturbed ? m.target.cell : 0; }

std::optional<double> closed_form_squared(const TransportMap& a, const TransportMap& b,
                                          const SourceDensity& rho) {
  if (is_cell_oracle(a) && is_cell_oracle(b) && same_instance(*a.cells, *b.cells)) {
    const int i = moved_cell(a), j = moved_cell(b);
    if (i == j) return 0.0;
    double v = 0.0;
    if (i > 0) v += cell_l2_squared(*a.cells, i);
    if (j > 0) v += cell_l2_squared(*a.cells, j);
    return v;
  }
  if (is_rotating(a) && is_rotating(b)) {
    if (!same_radius(a, b)) return std::nullopt;
    const double R = rotating_radius(a);
    const double delta = std::abs(a.target.theta - b.target.theta);
    if (delta == 0.0) return 0.0;
    if (rho.kind() == DensityKind::uniform_ball && delta < 0.5 * kPi) {
      return rotating_l2_squared_from_wedge(R, delta, delta / (2.0 * kPi));
    }
  }
  return std::nullopt;
}

// Radial mass per unit angle of the d = 2 blow-up profile on (0, s].
double radial_mass_2d(const SourceDensity& rho, double s) {
  if (rho.kind() == DensityKind::log_blowup) {
    return s <= kInvE ? -1.0 / std::log(s) : 2.0 + std::log(s);
  }
  return std::pow(s, rho.delta()) / rho.delta();
}

// Wedge mass by integrating along rays from A' = -e_1. A ray at angle beta
// stays in the support up to min(2 cos beta, 1 / cos beta) and in the wedge
// up to sin(theta) / sin(beta + theta).
Estimate wedge_quadrature(double theta, const SourceDensity& rho) {
  const double st = std::sin(theta);
  auto f = [&](double beta) {
    const double cb = std::cos(beta);
    if (!(cb > 0.0)) return 0.0;
    const double t = std::min({2.0 * cb, 1.0 / cb, st / std::sin(beta + theta)});
    return t > 0.0 ? radial_mass_2d(rho, t) : 0.0;
  };
  // the integrand changes on the scale theta near beta = 0
  std::vector<double> cuts{0.0};
  for (double b = 0.1 * theta; b < 0.5 * kPi; b *= 4.0) cuts.push_back(b);
  cuts.push_back(0.25 * kPi);
  cuts.push_back(0.5 * kPi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double value = 0.0, error = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double e = 0.0;
    value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[k], cuts[k + 1],
                                                                           15, 1e-12, &e);
    error += e;
  }
  return Estimate{rho.c0() * value, rho.c0() * error, Method::quadrature, 0};
}

void check_theta_range(double theta) {
  if (!(theta > 0.0 && theta < 0.25 * kPi)) {
    throw Error(ErrorKind::domain, "wedge angle must lie in (0, pi/4)");
  }
}

Estimate sqrt_estimate(const Estimate& sq) {
  Estimate e = sq;
  e.value = std::sqrt(std::max(0.0, sq.value));
  e.standard_error = e.value > 0.0 ? sq.standard_error / (2.0 * e.value) : std::sqrt(sq.standard_error);
  return e;
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

BlowupInstance family_instance(Family f, int d, double R, double delta) {
  switch (f) {
    case Family::rotating: return build_blowup(d, R, DensityKind::log_blowup);
    case Family::polyblowup: return build_blowup(d, R, DensityKind::poly_blowup, delta);
    case Family::control: return build_blowup(d, R, DensityKind::uniform_ball);
    case Family::cell: break;
  }
  throw Error(ErrorKind::config, "cell family has no blow-up instance");
}

std::vector<RatioEntry> ratios_from(const Estimate& l2, const Estimate& wp,
                                    const std::vector<double>& alphas) {
  std::vector<RatioEntry> out;
  for (double a : alphas) {
    RatioEntry r;
    r.alpha = a;
    r.ratio = l2.value > 0.0 ? std::exp(std::log(l2.value) - a * std::log(wp.value)) : 0.0;
    out.push_back(r);
  }
  return out;
}

StabilityRecord rotating_record(const SweepConfig& c, const BlowupInstance& inst, double theta,
                                SamplerState state) {
  StabilityRecord rec;
  rec.family = c.family;
  rec.parameter = theta;
  rec.p = c.p;
  rec.state = state;
  rec.wp = Estimate{wasserstein_rotating(inst.R, theta), 0.0, Method::closed_form, 0};
  const std::size_t n = theta <= c.small_theta ? c.small_theta_samples : c.samples;
  const TransportMap m0 = rotating_map(inst, 0.0);
  const TransportMap mt = rotating_map(inst, theta);
  rec.l2_squared = l2_map_distance_squared(m0, mt, inst.density, Method::monte_carlo, n, state);
  rec.l2 = sqrt_estimate(rec.l2_squared);
  rec.ratios = ratios_from(rec.l2, rec.wp, c.alphas);
  if (inst.density.is_blowup()) {
    rec.l2_squared_lower_bound = rotating_l2_squared_lower_bound(inst, theta);
    rec.bound_ok = rec.l2_squared.value + 3.0 * rec.l2_squared.standard_error >=
                   *rec.l2_squared_lower_bound;
    if (c.d == 2) {
      rec.cross_check = l2_map_distance_squared(m0, mt, inst.density, Method::quadrature);
    }
  } else {
    rec.cross_check = l2_map_distance_squared(m0, mt, inst.density, Method::closed_form);
  }
  return rec;
}

StabilityRecord cell_record(const SweepConfig& c, const CellInstance& inst, int i,
                            SamplerState state) {
  StabilityRecord rec;
  rec.family = Family::cell;
  rec.parameter = i;
  rec.p = c.p;
  rec.state = state;
  rec.wp = Estimate{wasserstein_cell_perturbation(inst, i, c.p), 0.0, Method::closed_form, 0};
  rec.l2_squared = Estimate{cell_l2_squared(inst, i), 0.0, Method::closed_form, 0};
  rec.l2 = sqrt_estimate(rec.l2_squared);
  rec.ratios = ratios_from(rec.l2, rec.wp, c.alphas);
  for (RatioEntry& r : rec.ratios) {
    r.ratio_squared_bound = cell_ratio_squared_bound(inst, i, c.p, r.alpha);
    // both sides are closed forms; allow rounding only
    rec.bound_ok = rec.bound_ok && r.ratio * r.ratio >= *r.ratio_squared_bound * (1.0 - 1e-12);
  }
  if (c.cell_monte_carlo) {
    rec.cross_check = l2_map_distance_squared(cell_map(inst), perturbed_map(inst, i), inst.density(),
                                              Method::monte_carlo, c.samples, state);
  }
  return rec;
}

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::rotating: return "rotating";
    case Family::cell: return "cell";
    case Family::polyblowup: return "polyblowup";
    case Family::control: return "control";
  }
  return "unknown";
}

Family family_from_string(std::string_view s) {
  for (auto f : {Family::rotating, Family::cell, Family::polyblowup, Family::control}) {
    if (s == to_string(f)) return f;
  }
  throw Error(ErrorKind::config, "unknown family '" + std::string(s) + "'");
}

Estimate l2_map_distance_squared(const TransportMap& a, const TransportMap& b,
                                 const SourceDensity& rho, Method method, std::size_t n,
                                 SamplerState state) {
  if (method == Method::closed_form) {
    if (const auto v = closed_form_squared(a, b, rho)) return Estimate{*v, 0.0, Method::closed_form, 0};
    throw Error(ErrorKind::unsupported_method, "no closed form for this pair of maps");
  }
  if (method == Method::quadrature) {
    const bool zero_angle = a.target.theta == 0.0 || b.target.theta == 0.0;
    if (is_rotating(a) && is_rotating(b) && zero_angle && rho.is_blowup() && rho.dim() == 2 &&
        same_radius(a, b)) {
      const double theta = std::abs(a.target.theta - b.target.theta);
      if (theta == 0.0) return Estimate{0.0, 0.0, Method::quadrature, 0};
      const Estimate w = wedge_mass(theta, rho, Method::quadrature);
      const double R = rotating_radius(a);
      const double v = rotating_l2_squared_from_wedge(R, theta, w.value);
      const double slope = std::abs(8.0 * R * R * std::cos(theta));
      return Estimate{v, slope * w.standard_error, Method::quadrature, 0};
    }
    throw Error(ErrorKind::unsupported_method,
                "quadrature covers rotating pairs with one zero angle on d = 2 blow-up sources");
  }
  if (n == 0) throw Error(ErrorKind::domain, "Monte Carlo needs at least one sample");
  std::array<RunningMoments, kShards> parts{};
  stream_samples(rho, state, n, [&](std::size_t s, const Point& x) {
    parts[s].add(squared_distance(a.image(x), b.image(x)));
  });
  RunningMoments total;
  for (const auto& p : parts) total.merge(p);
  return total.estimate();
}

Estimate l2_map_distance(const TransportMap& a, const TransportMap& b, const SourceDensity& rho,
                         Method method, std::size_t n, SamplerState state) {
  return sqrt_estimate(l2_map_distance_squared(a, b, rho, method, n, state));
}

Estimate wedge_mass(double theta, const SourceDensity& rho, Method method, std::size_t n,
                    SamplerState state) {
  check_theta_range(theta);
  if (method == Method::closed_form) {
    if (rho.kind() != DensityKind::uniform_ball) {
      throw Error(ErrorKind::unsupported_method, "closed-form wedge mass needs the uniform ball");
    }
    return Estimate{theta / (2.0 * kPi), 0.0, Method::closed_form, 0};
  }
  if (method == Method::quadrature) {
    if (!rho.is_blowup() || rho.dim() != 2) {
      throw Error(ErrorKind::unsupported_method, "wedge quadrature needs a d = 2 blow-up source");
    }
    return wedge_quadrature(theta, rho);
  }
  if (n == 0) throw Error(ErrorKind::domain, "Monte Carlo needs at least one sample");
  const double s = std::sin(theta), c = std::cos(theta);
  std::array<RunningMoments, kShards> parts{};
  stream_samples(rho, state, n, [&](std::size_t shard, const Point& x) {
    parts[shard].add(x[1] > 0.0 && x[0] * s + x[1] * c < 0.0 ? 1.0 : 0.0);
  });
  RunningMoments total;
  for (const auto& p : parts) total.merge(p);
  return total.estimate();
}

double wedge_mass_lower_bound(double theta, const SourceDensity& rho) {
  if (!rho.is_blowup()) throw Error(ErrorKind::unsupported_kind, "lower bound needs a blow-up source");
  if (!(theta > 0.0 && theta <= kMaxTheta)) {
    throw Error(ErrorKind::domain, "wedge lower bound is validated for 0 < theta <= 0.1");
  }
  return rho.sector_mass(0.25 * theta, singular_sector_fraction(rho.dim())).value;
}

double rotating_l2_squared_lower_bound(const BlowupInstance& inst, double theta) {
  return inst.R * inst.R * wedge_mass_lower_bound(theta, inst.density);
}

double rotating_l2_squared_from_wedge(double R, double theta, double wedge) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  return 8.0 * R * R * c * c * wedge + 4.0 * R * R * s * s * (1.0 - 2.0 * wedge);
}

double cell_l2_squared(const CellInstance& inst, int i) {
  inst.check_index(i);
  const double r = inst.radius[i - 1], w = inst.length[i - 1];
  return inst.sigma[i - 1] * (2.0 * r * r + 4.0 * w * w);
}

double cell_ratio_squared_bound(const CellInstance& inst, int i, double p, double alpha) {
  inst.check_index(i);
  const double r = inst.radius[i - 1], w = inst.length[i - 1], s = inst.sigma[i - 1];
  return std::exp(std::log(4.0 * w * w * s) - 2.0 * alpha * std::log(r) -
                  (2.0 * alpha / p) * std::log(2.0 * s));
}

CellLogSequence::CellLogSequence(const CellInstance& inst) : inst_(&inst), summed_(inst.N) {
  for (int j = 1; j <= inst.N; ++j) sum_ += std::ldexp(1.0, -j) / (static_cast<double>(j) * j);
}

CellLogTerms CellLogSequence::operator()(int i) {
  if (i < 1) throw Error(ErrorKind::index_out_of_range, "cell indices start at 1");
  if (i <= inst_->N) {
    return {std::log(inst_->radius[i - 1]), std::log(inst_->length[i - 1]),
            std::log(inst_->sigma[i - 1])};
  }
  for (; summed_ < i; ++summed_) {
    const double j = summed_ + 1;
    sum_ += std::exp(-j * kLn2 - 2.0 * std::log(j));
  }
  const double ic = i;
  CellLogTerms t;
  t.log_r = std::log(inst_->c0) - ic * kLn2;
  t.log_w = std::log(inst_->c0 * inst_->k1) - 2.0 * std::log(ic);
  // sigma_i = l_i r_i / (2 c0^2 k1 sum)
  t.log_sigma = -ic * kLn2 - 2.0 * std::log(ic) - std::log(2.0 * sum_);
  return t;
}

double cell_log_l2(const CellLogTerms& t) {
  // sigma (2 r^2 + 4 w^2)
  return 0.5 * (t.log_sigma + log_sum_exp(std::log(2.0) + 2.0 * t.log_r, std::log(4.0) + 2.0 * t.log_w));
}

double cell_log_wp(const CellLogTerms& t, double p) { return t.log_r + (kLn2 + t.log_sigma) / p; }

void check_sweep_config(const SweepConfig& c) {
  if (c.grid.empty()) throw Error(ErrorKind::config, "sweep grid is empty");
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) throw Error(ErrorKind::config, "p must be >= 1");
  for (double a : c.alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorKind::config, "alpha values must be positive");
  }
  if (c.family == Family::cell) {
    if (c.N < 1) throw Error(ErrorKind::config, "cell instance needs N >= 1");
    for (double v : c.grid) {
      if (!(v >= 1.0 && v <= c.N && std::floor(v) == v)) {
        throw Error(ErrorKind::config, "cell grid values must be integers in [1, N]");
      }
    }
    return;
  }
  if (c.d < 2 || c.d > kMaxDim) throw Error(ErrorKind::config, "dimension must lie in [2, 8]");
  if (!(c.R > 0.0) || !std::isfinite(c.R)) throw Error(ErrorKind::config, "R must be positive");
  if (c.family == Family::polyblowup && !(c.delta > 0.0 && c.delta < c.d)) {
    throw Error(ErrorKind::config, "delta must lie in (0, d)");
  }
  for (double t : c.grid) {
    if (!(t > 0.0 && t <= kMaxTheta)) {
      throw Error(ErrorKind::config, "theta grid violates the theta <= 0.1 contract (need 0 < theta <= 0.1)");
    }
  }
  if (c.samples < 1000 || c.small_theta_samples < 1000) {
    throw Error(ErrorKind::config, "Monte Carlo budgets must be at least 1000");
  }
}

std::vector<StabilityRecord> sweep(const SweepConfig& config) {
  check_sweep_config(config);
  std::vector<StabilityRecord> out;
  out.reserve(config.grid.size());
  if (config.family == Family::cell) {
    const CellInstance inst = choose_sequences(config.N, config.p);
    for (std::size_t k = 0; k < config.grid.size(); ++k) {
      const SamplerState st{config.state.seed, derive_counter(config.state.counter, k)};
      out.push_back(cell_record(config, inst, static_cast<int>(config.grid[k]), st));
    }
    return out;
  }
  const BlowupInstance inst = family_instance(config.family, config.d, config.R, config.delta);
  for (std::size_t k = 0; k < config.grid.size(); ++k) {
    const SamplerState st{config.state.seed, derive_counter(config.state.counter, k)};
    out.push_back(rotating_record(config, inst, config.grid[k], st));
  }
  return out;
}

HolderFit fit_holder_points(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::fit, "fit needs paired values");
  if (x.size() < 5) throw Error(ErrorKind::fit, "fit needs at least 5 points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0) || !std::isfinite(x[k]) || !std::isfinite(y[k])) {
      throw Error(ErrorKind::fit, "fit needs positive finite values");
    }
    lx[k] = std::log(x[k]);
    ly[k] = std::log(y[k]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  if (!(sxx > 1e-24 * n)) throw Error(ErrorKind::fit, "degenerate grid: all W_p values are equal");
  HolderFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = ly[k] - f.intercept - f.slope * lx[k];
    rss += e * e;
  }
  f.residual = std::sqrt(rss / n);
  f.points = n;
  f.parameter_min = *std::min_element(x.begin(), x.end());
  f.parameter_max = *std::max_element(x.begin(), x.end());
  return f;
}

HolderFit fit_holder(const std::vector<StabilityRecord>& records) {
  std::vector<double> w, l;
  double pmin = INFINITY, pmax = -INFINITY;
  for (const auto& r : records) {
    w.push_back(r.wp.value);
    l.push_back(r.l2.value);
    pmin = std::min(pmin, r.parameter);
    pmax = std::max(pmax, r.parameter);
  }
  HolderFit f = fit_holder_points(w, l);
  f.parameter_min = pmin;
  f.parameter_max = pmax;
  return f;
}

Witness find_witness(double C, double alpha, double p, Family family, const WitnessOptions& o) {
  if (!(C > 0.0) || !std::isfinite(C)) throw Error(ErrorKind::domain, "C must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorKind::domain, "alpha must be positive");
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorKind::domain, "p must be >= 1");
  Witness w;
  w.family = family;
  w.C = C;
  w.alpha = alpha;
  w.p = p;
  const double log_c = std::log(C);

  if (family == Family::cell) {
    const double threshold = p / (2.0 * (p + 1.0));
    if (alpha <= threshold) {
      throw Error(ErrorKind::no_witness_guarantee,
                  "cell family: failure is only established for alpha > p / (2(p+1)) = " +
                      std::to_string(threshold));
    }
    const CellInstance inst = choose_sequences(o.N, p);
    CellLogSequence seq(inst);
    for (int i = 1; i <= o.max_index; ++i) {
      const CellLogTerms t = seq(i);
      const double ll = cell_log_l2(t), lw = cell_log_wp(t, p);
      if (ll - alpha * lw > log_c) {
        w.parameter = i;
        w.log_l2 = ll;
        w.log_wp = lw;
        w.log_ratio = ll - alpha * lw;
        w.verified = true;
        return w;
      }
    }
    throw Error(ErrorKind::no_witness_guarantee, "no cell index up to the scan limit exceeds C");
  }

  const BlowupInstance& inst = o.blowup;
  const DensityKind want = family == Family::rotating     ? DensityKind::log_blowup
                           : family == Family::polyblowup ? DensityKind::poly_blowup
                                                          : DensityKind::uniform_ball;
  if (inst.density.kind() != want) {
    throw Error(ErrorKind::config, "witness instance does not match the family");
  }
  if (!(o.theta_start > 0.0 && o.theta_start <= kMaxTheta) || o.steps_per_decade < 1) {
    throw Error(ErrorKind::config, "theta scan must start in (0, 0.1]");
  }
  const double R = inst.R;
  for (int k = 0;; ++k) {
    const double theta = o.theta_start * std::pow(10.0, -static_cast<double>(k) / o.steps_per_decade);
    if (!(theta >= o.theta_min)) break;
    const double lw = std::log(wasserstein_rotating(R, theta));
    double ll = 0.0;
    if (family == Family::control) {
      ll = 0.5 * std::log(rotating_l2_squared_from_wedge(R, theta, theta / (2.0 * kPi)));
    } else {
      const double lb = rotating_l2_squared_lower_bound(inst, theta);
      if (!(lb > 0.0)) continue;
      ll = 0.5 * std::log(lb);
    }
    if (ll - alpha * lw <= log_c) continue;
    w.parameter = theta;
    w.log_l2 = ll;
    w.log_wp = lw;
    w.log_ratio = ll - alpha * lw;
    if (family == Family::control || o.samples == 0) {
      w.verified = true;
      return w;
    }
    const SamplerState st{o.state.seed, derive_counter(o.state.counter, static_cast<std::uint64_t>(k))};
    const Estimate m = l2_map_distance(rotating_map(inst, 0.0), rotating_map(inst, theta), inst.density,
                                       Method::monte_carlo, o.samples, st);
    w.measured = m;
    w.verified = m.value > C * std::exp(alpha * lw);
    if (w.verified) return w;
  }
  throw Error(ErrorKind::no_witness_guarantee,
              std::string(to_string(family)) + " family: no theta in the scan exceeds C W_p^alpha");
}

nlohmann::json to_json(const Estimate& e) {
  nlohmann::json j{{"value", e.value}, {"method", std::string(to_string(e.method))}};
  if (e.method != Method::closed_form) j["se"] = e.standard_error;
  if (e.method == Method::monte_carlo) j["samples"] = e.samples;
  return j;
}

nlohmann::json to_json(const StabilityRecord& r) {
  nlohmann::json ratios = nlohmann::json::array();
  for (const auto& e : r.ratios) {
    ratios.push_back({{"alpha", e.alpha}, {"ratio", e.ratio}, {"ratio_squared_bound", optional_json(e.ratio_squared_bound)}});
  }
  return nlohmann::json{{"family", std::string(to_string(r.family))},
                        {"parameter", r.parameter},
                        {"p", r.p},
                        {"W_p", to_json(r.wp)},
                        {"l2", to_json(r.l2)},
                        {"l2_squared", to_json(r.l2_squared)},
                        {"ratios", ratios},
                        {"l2_squared_lower_bound", optional_json(r.l2_squared_lower_bound)},
                        {"bound_ok", r.bound_ok},
                        {"cross_check", r.cross_check ? to_json(*r.cross_check) : nlohmann::json()},
                        {"seed", r.state.seed},
                        {"counter", r.state.counter}};
}

nlohmann::json to_json(const HolderFit& f) {
  return nlohmann::json{{"slope", f.slope},
                        {"intercept", f.intercept},
                        {"residual", f.residual},
                        {"points", f.points},
                        {"parameter_min", f.parameter_min},
                        {"parameter_max", f.parameter_max}};
}

nlohmann::json to_json(const Witness& w) {
  return nlohmann::json{{"family", std::string(to_string(w.family))},
                        {"C", w.C},
                        {"alpha", w.alpha},
                        {"p", w.p},
                        {"parameter", w.parameter},
                        {"log_W_p", w.log_wp},
                        {"log_l2", w.log_l2},
                        {"log_ratio", w.log_ratio},
                        {"measured", w.measured ? to_json(*w.measured) : nlohmann::json()},
                        {"verified", w.verified}};
}

void write_sweep_csv(std::ostream& os, const std::vector<StabilityRecord>& records,
                     const std::vector<double>& alphas) {
  const auto old = os.precision(6);
  os << "family,parameter,p,W_p,l2,l2_se,method";
  for (double a : alphas) os << ",ratio@" << a;
  os.precision(17);
  os << ",seed,counter,l2_squared,l2_squared_se,l2_squared_lower_bound,bound_ok,"
        "cross_check,cross_check_se,cross_check_method\n";
  for (const auto& r : records) {
    os << to_string(r.family) << ',';
    os << r.parameter;
    os << ',';
    os << r.p;
    os << ',';
    os << r.wp.value;
    os << ',';
    os << r.l2.value;
    os << ',';
    os << r.l2.standard_error;
    os << ',' << to_string(r.l2.method);
    if (r.l2.method == Method::monte_carlo) os << "(n=" << r.l2.samples << ')';
    for (double a : alphas) {
      os << ',';
      const auto it = std::find_if(r.ratios.begin(), r.ratios.end(),
                                   [a](const RatioEntry& e) { return e.alpha == a; });
      if (it != r.ratios.end()) os << it->ratio;
    }
    os << ',' << r.state.seed << ',' << r.state.counter << ',';
    os << r.l2_squared.value;
    os << ',';
    os << r.l2_squared.standard_error;
    os << ',';
    if (r.l2_squared_lower_bound) os << *r.l2_squared_lower_bound;
    os << ',' << (r.bound_ok ? "true" : "false") << ',';
    if (r.cross_check) {
      os << r.cross_check->value;
      os << ',';
      os << r.cross_check->standard_error;
      os << ',' << to_string(r.cross_check->method);
    } else {
      os << ",,";
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace otstab
