#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "json.hpp"
#include "otstab/constructions.hpp"
#include "otstab/measures.hpp"
#include "otstab/transport_maps.hpp"

namespace otstab {

/// Per-atom Laguerre weights psi, normalized so psi[0] = 0. Assignment is
/// argmin_j |x - y_j|^2 - psi_j.
struct LaguerreWeights {
  std::vector<double> psi;
  DiscreteMeasure target;
};

/// argmin_j |x - atoms[j]|^2 - psi[j]; ties go to the lowest index.
int laguerre_assign(const Point& x, const std::vector<Point>& atoms, const std::vector<double>& psi);

struct SdotOptions {
  /// Cell unions: draw the same number of points in every box and weight
  /// them by box mass, so that small cells are resolved.
  bool stratify = true;
  /// Add the images of every sample under the density's reflection group.
  bool symmetrize = true;
  /// Replace the LP duals by the midpoint of the set of weight vectors that
  /// reproduce the optimal sample assignment.
  bool center = true;
};

struct SdotSolution {
  LaguerreWeights weights;
  TransportMap map;
  std::size_t training_points = 0;  ///< after symmetrization and merging
  double transport_cost = 0.0;      ///< empirical quadratic cost
  bool centered = false;            ///< false if centering had to be skipped
  SamplerState state;
};

/// Sample-average approximation: n draws from rho, exact discrete OT to the
/// target with quadratic cost, target duals as psi. Requires n >= 1e4 and at
/// most 1e3 target atoms.
SdotSolution solve_sdot(const SourceDensity& rho, const TargetFamily& target, std::size_t n,
                        SamplerState state, const SdotOptions& options = {});

struct Disagreement {
  Point x;
  int candidate = 0;
  int oracle = 0;
  double boundary_distance = 0.0;
  double local_scale = 1.0;
};

struct AgreementReport {
  std::size_t samples = 0;
  std::size_t disagreements = 0;
  double rate = 1.0;
  double rate_standard_error = 0.0;
  /// Disagreements farther than threshold * local scale from the oracle's
  /// decision boundary (unknown boundary counts as far).
  std::size_t interior_disagreements = 0;
  double threshold = 1e-2;
  double max_relative_boundary_distance = 0.0;
  std::vector<Disagreement> atlas;  ///< first disagreements, capped at 1000
  SamplerState state;
};

/// Agreement of two maps onto targets of equal size on n fresh draws.
AgreementReport compare_to_oracle(const TransportMap& candidate, const TransportMap& oracle,
                                  const SourceDensity& rho, std::size_t n, SamplerState state,
                                  double threshold = 1e-2);

nlohmann::json to_json(const LaguerreWeights& w);
nlohmann::json to_json(const AgreementReport& r);
/// CSV of the atlas: x coordinates, candidate, oracle, boundary distance, scale.
void write_disagreement_csv(std::ostream& os, const AgreementReport& r);

}  // namespace otstab
