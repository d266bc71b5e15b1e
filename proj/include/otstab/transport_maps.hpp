#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"
#include "otstab/constructions.hpp"
#include "otstab/measures.hpp"
#include "otstab/rng.hpp"

namespace otstab {

enum class Provenance { oracle, solver };

/// Which closed-form map, if any, a TransportMap is. Lets the stability
/// module dispatch to exact identities.
enum class OracleKind { none, rotating, cell, perturbed };

/// A map from source points to atom indices of a target family.
struct TransportMap {
  TargetFamily target;
  Provenance provenance = Provenance::oracle;
  OracleKind oracle = OracleKind::none;
  std::function<int(const Point&)> assign;
  /// Distance from x to the map's decision boundary, when known.
  std::function<double(const Point&)> boundary_distance;
  /// Length scale used to judge boundary proximity, when known.
  std::function<double(const Point&)> local_scale;
  /// Set for the cell oracles; gives closed forms access to the sequences.
  std::shared_ptr<const CellInstance> cells;

  const Point& image(const Point& x) const { return target.measure.atom(assign(x)); }
};

/// 0 (B_theta) when <x, B_theta> >= 0, else 1 (B_theta').
int oracle_rotating(const Point& x, double theta, double R);
/// Atom index of B_i^+ (x_2 >= 0) or B_i^- for the cell containing x.
/// Throws outside_support when x lies in no cell.
int oracle_cell(const Point& x, const CellInstance& inst);
/// C_i^+ on the plus box of cell i, C_i^- on its minus box, oracle_cell
/// elsewhere.
int oracle_perturbed(const Point& x, const CellInstance& inst, int i);

TransportMap rotating_map(const BlowupInstance& inst, double theta);
TransportMap cell_map(const CellInstance& inst);
TransportMap perturbed_map(const CellInstance& inst, int i);

struct CertificateReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// min over samples of |x - second nearest atom| - |x - assigned atom|.
  double min_margin = 0.0;
  std::optional<Point> witness;
  SamplerState state;
};

/// Checks on n draws from rho that the assigned atom is a nearest atom.
/// Throws certificate_failure (message carries the witness) on a violation
/// unless `throw_on_violation` is false.
CertificateReport closest_point_certificate(const TransportMap& map, const SourceDensity& rho,
                                            std::size_t n, SamplerState state,
                                            bool throw_on_violation = true);

struct PushforwardReport {
  std::size_t samples = 0;
  std::vector<double> empirical;
  std::vector<double> expected;
  std::vector<double> standard_error;
  double max_abs_deviation = 0.0;
  double max_z = 0.0;  ///< largest |empirical - expected| / SE
  SamplerState state;
};

/// Empirical per-atom mass over n draws. Throws pushforward_failure when an
/// atom deviates by more than 5 SE.
PushforwardReport pushforward_check(const TransportMap& map, const SourceDensity& rho,
                                    std::size_t n, SamplerState state);

nlohmann::json to_json(const CertificateReport& r);
nlohmann::json to_json(const PushforwardReport& r);

}  // namespace otstab
