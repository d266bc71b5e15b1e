#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "otstab/discrete_measure.hpp"
#include "otstab/geometry.hpp"
#include "otstab/measures.hpp"

namespace otstab {

/// Source with two blow-up points at A = e_1 and A' = -e_1 (or the uniform
/// ball used as a control), plus the target radius R.
struct BlowupInstance {
  int d = 2;
  double R = 1.0;
  SourceDensity density = SourceDensity::uniform_ball(2);
  /// Solid-angle fraction of the sector cone at A'.
  double cone_fraction = 0.0;
};

/// kind is log_blowup, poly_blowup (with delta) or uniform_ball.
BlowupInstance build_blowup(int d, double R, DensityKind kind, double delta = 0.0);

/// Truncated union of N box pairs along the first axis. Sequences are
/// indexed 0..N-1 internally; all public accessors take the 1-based cell
/// index i in [1, N].
struct CellInstance {
  int d = 2;
  int N = 0;
  double k1 = 0.0;  ///< width constant: l_i = w_i = c0 k1 i^-2
  double k2 = 0.0;  ///< gap constant: u_{i+1} - u_i = c0 k2 i^-2
  double c0 = 0.0;  ///< scale fixing sum over all i of l_i r_i = 1/2
  double series = 0.0;  ///< sum_{i>=1} i^-2 2^-i
  std::vector<double> length;  ///< l_i
  std::vector<double> radius;  ///< r_i
  std::vector<double> offset;  ///< w_i
  std::vector<double> center;  ///< u_i
  std::vector<double> sigma;   ///< renormalized box masses

  Point anchor_plus(int i) const;   ///< (u_i + w_i, 0, ...)
  Point anchor_minus(int i) const;  ///< (u_i - w_i, 0, ...)
  Point b_plus(int i) const;        ///< (u_i, w_i, 0, ...)
  Point b_minus(int i) const;       ///< (u_i, -w_i, 0, ...)
  Point c_plus(int i) const;        ///< (u_i + r_i, w_i, 0, ...)
  Point c_minus(int i) const;       ///< (u_i - r_i, -w_i, 0, ...)
  Box box_plus(int i) const;
  Box box_minus(int i) const;

  /// 1-based index of the cell whose boxes contain x, or 0.
  int locate(const Point& x) const;
  /// 1-based index of the cell nearest to x along the first axis.
  int nearest_cell(double x1) const;

  /// Uniform density on the union of all 2N boxes.
  SourceDensity density() const;

  /// Throws index_out_of_range unless 1 <= i <= N.
  void check_index(int i) const;
};

enum class CellProfile { geometric_radius };

/// r_i = c0 2^-i, l_i = w_i = c0 k1 i^-2, u_{i+1} - u_i = c0 k2 i^-2 with
/// minimal k1, k2 = 100 k1 and u_i = -c0 k2 trigamma(i) so that the centres
/// accumulate at the origin. The exponent p does not enter the geometry and
/// is accepted for interface symmetry with the sweeps. Validates before
/// returning and throws internal_consistency on any violation.
CellInstance choose_sequences(int N, double p = 2.0,
                              CellProfile profile = CellProfile::geometric_radius, int d = 2);

/// max over i >= 1 of 100 i^2 2^-i.
double minimal_width_constant();
/// sum_{i>=1} i^-2 2^-i, summed until the tail is below 1e-16.
double radius_width_series();

struct ConstraintReport {
  std::string name;  ///< offset_dominates_radius, cell_separation, boxes_disjoint, total_mass
  int index = 0;     ///< 1-based cell index (0 for global checks)
  double margin = 0.0;  ///< achieved / required for ratio checks, raw gap or error otherwise
  bool satisfied = true;
};

/// One report per constraint and cell.
std::vector<ConstraintReport> validate(const CellInstance& inst);
/// The unsatisfied subset of validate().
std::vector<ConstraintReport> violations(const CellInstance& inst);

enum class TargetKind { rotating_pair, cell_atoms, perturbed_cell_atoms };

std::string_view to_string(TargetKind k);

struct TargetFamily {
  TargetKind kind = TargetKind::rotating_pair;
  double theta = 0.0;  ///< rotating pair only
  int cell = 0;        ///< perturbed family only (1-based)
  DiscreteMeasure measure;
};

/// Atoms [B_theta, -B_theta] with weight 1/2 each.
TargetFamily rotating_pair(const BlowupInstance& inst, double theta);
/// Atoms B_i^+ at index 2(i-1) and B_i^- at 2(i-1)+1 with weights sigma_i.
TargetFamily cell_atoms(const CellInstance& inst);
/// As cell_atoms with the i-th pair replaced by C_i^+, C_i^-.
TargetFamily perturbed_cell_atoms(const CellInstance& inst, int i);

inline int atom_index(int cell, Sign s) { return 2 * (cell - 1) + (s == Sign::plus ? 0 : 1); }

nlohmann::json to_json(const CellInstance& inst);
/// Reads sequences verbatim (no recomputation), so a tampered file is
/// detected by validate().
CellInstance cell_instance_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<ConstraintReport>& reports);

}  // namespace otstab
