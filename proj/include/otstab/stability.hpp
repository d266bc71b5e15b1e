#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "otstab/constructions.hpp"
#include "otstab/estimate.hpp"
#include "otstab/measures.hpp"
#include "otstab/rng.hpp"
#include "otstab/transport_maps.hpp"

namespace otstab {

/// rotating: log blow-up source with rotating targets; polyblowup: the same
/// with the polynomial blow-up; control: uniform ball with rotating targets;
/// cell: cell-union source with one perturbed pair.
enum class Family { rotating, cell, polyblowup, control };

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

/// Squared L2(rho) distance between two maps.
///  closed_form: cell/perturbed oracle pairs on the same instance, and
///    rotating pairs under a uniform-ball source.
///  quadrature: rotating pairs with one angle zero, d = 2 blow-up sources.
///  monte_carlo: any pair, n draws from rho.
/// Other combinations throw unsupported_method.
Estimate l2_map_distance_squared(const TransportMap& a, const TransportMap& b,
                                 const SourceDensity& rho, Method method,
                                 std::size_t n = 1'000'000, SamplerState state = {});
/// Square root of the above; the SE follows by the delta method.
Estimate l2_map_distance(const TransportMap& a, const TransportMap& b, const SourceDensity& rho,
                         Method method, std::size_t n = 1'000'000, SamplerState state = {});

/// rho-mass of {<x,B_0> > 0 > <x,B_theta>} for 0 < theta < pi/4.
/// closed_form needs the uniform ball; quadrature a d = 2 blow-up.
Estimate wedge_mass(double theta, const SourceDensity& rho, Method method,
                    std::size_t n = 1'000'000, SamplerState state = {});
/// Mass of the singular sector of radius theta/4 at A', a lower bound for
/// the wedge mass of a blow-up source when theta <= 0.1.
double wedge_mass_lower_bound(double theta, const SourceDensity& rho);
/// R^2 times the wedge lower bound: a lower bound for the squared rotating
/// map distance.
double rotating_l2_squared_lower_bound(const BlowupInstance& inst, double theta);
/// Squared rotating map distance given the wedge mass W:
/// 8R^2 cos^2(theta/2) W + 4R^2 sin^2(theta/2) (1 - 2W).
double rotating_l2_squared_from_wedge(double R, double theta, double wedge);

/// sigma_i (2 r_i^2 + 4 w_i^2).
double cell_l2_squared(const CellInstance& inst, int i);
/// Lower bound for (l2 / W_p^alpha)^2 on the cell family:
/// 4 w_i^2 sigma_i r_i^(-2 alpha) (2 sigma_i)^(-2 alpha / p).
double cell_ratio_squared_bound(const CellInstance& inst, int i, double p, double alpha);

/// Logarithms of r_i, w_i and sigma_i for any i >= 1. Indices beyond the
/// instance extend the sequences with the same constants and renormalize
/// over the first max(N, i) cells.
struct CellLogTerms {
  double log_r = 0.0;
  double log_w = 0.0;
  double log_sigma = 0.0;
};

class CellLogSequence {
 public:
  explicit CellLogSequence(const CellInstance& inst);
  CellLogTerms operator()(int i);

 private:
  const CellInstance* inst_;
  int summed_ = 0;
  double sum_ = 0.0;  ///< sum_{j <= summed_} l_j r_j / (c0^2 k1)
};

/// log(l2), log(W_p) for cell i, from log terms.
double cell_log_l2(const CellLogTerms& t);
double cell_log_wp(const CellLogTerms& t, double p);

struct RatioEntry {
  double alpha = 0.0;
  double ratio = 0.0;                       ///< l2 / W_p^alpha
  std::optional<double> ratio_squared_bound;  ///< cell family
};

struct StabilityRecord {
  Family family = Family::rotating;
  double parameter = 0.0;  ///< theta, or cell index i
  double p = 2.0;
  Estimate wp;
  Estimate l2;
  Estimate l2_squared;
  std::vector<RatioEntry> ratios;
  /// Lower bound for l2_squared (blow-up families).
  std::optional<double> l2_squared_lower_bound;
  /// Every bound attached to the record holds (MC values allowed 3 SE).
  bool bound_ok = true;
  /// Independent evaluation of l2_squared (quadrature, closed form or MC).
  std::optional<Estimate> cross_check;
  SamplerState state;
};

struct SweepConfig {
  Family family = Family::rotating;
  int d = 2;
  double R = 2.0;
  double delta = 0.5;  ///< polyblowup
  int N = 20;          ///< cell
  std::vector<double> grid;  ///< thetas, or cell indices
  double p = 2.0;
  std::vector<double> alphas;
  std::size_t samples = 1'000'000;
  std::size_t small_theta_samples = 10'000'000;
  double small_theta = 1e-5;
  /// Cell family: add a Monte Carlo cross-check of the closed form.
  bool cell_monte_carlo = false;
  SamplerState state;
};

/// Validates grid and parameters; throws config errors.
void check_sweep_config(const SweepConfig& c);

/// One record per grid value; point k draws from counter
/// derive_counter(state.counter, k).
std::vector<StabilityRecord> sweep(const SweepConfig& config);

struct HolderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< RMS residual in log space
  std::size_t points = 0;
  double parameter_min = 0.0;
  double parameter_max = 0.0;
};

/// OLS of log l2 against log W_p. Needs >= 5 records with positive values
/// and non-constant W_p; throws fit errors otherwise.
HolderFit fit_holder(const std::vector<StabilityRecord>& records);
/// Same on raw (x, y) pairs, both positive; parameters default to x.
HolderFit fit_holder_points(const std::vector<double>& x, const std::vector<double>& y);

struct WitnessOptions {
  BlowupInstance blowup;     ///< rotating / polyblowup / control
  int N = 20;                ///< cell instance size (scan continues past N)
  int max_index = 1'000'000;
  double theta_start = 0.1;
  double theta_min = 1e-300;
  int steps_per_decade = 4;
  std::size_t samples = 1'000'000;  ///< 0 skips the Monte Carlo check
  SamplerState state;
};

struct Witness {
  Family family = Family::cell;
  double C = 0.0;
  double alpha = 0.0;
  double p = 1.0;
  double parameter = 0.0;  ///< i, or theta
  double log_wp = 0.0;
  double log_l2 = 0.0;     ///< closed form (cell, control) or closed-form lower bound
  double log_ratio = 0.0;  ///< log(l2 / W_p^alpha)
  /// Monte Carlo l2 at the witness, for the blow-up families.
  std::optional<Estimate> measured;
  bool verified = false;   ///< measured (or exact) l2 exceeds C W_p^alpha
};

/// Smallest grid parameter with l2 > C W_p^alpha. Throws domain for C <= 0,
/// alpha <= 0 or p < 1, and no_witness_guarantee when the family's ratio is
/// not known to diverge (cell with alpha <= p / (2(p+1))) or the scan ends.
Witness find_witness(double C, double alpha, double p, Family family,
                     const WitnessOptions& options);

nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const StabilityRecord& r);
nlohmann::json to_json(const HolderFit& f);
nlohmann::json to_json(const Witness& w);

/// CSV rows (no header comment): family, parameter, p, W_p, l2, l2_se,
/// method, ratio@alpha..., seed, then diagnostic columns.
void write_sweep_csv(std::ostream& os, const std::vector<StabilityRecord>& records,
                     const std::vector<double>& alphas);

}  // namespace otstab
