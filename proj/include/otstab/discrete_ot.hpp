#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "otstab/constructions.hpp"
#include "otstab/discrete_measure.hpp"

namespace otstab {

/// Largest number of arcs (source atoms * target atoms) the exact solver
/// accepts.
inline constexpr std::size_t kMaxArcs = 25'000'000;

struct CouplingEntry {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
};

struct ExactSolution {
  double p = 1.0;
  double cost = 0.0;        ///< optimal sum of mass * |x - y|^p
  double wasserstein = 0.0;  ///< cost^{1/p}
  std::vector<CouplingEntry> coupling;  ///< nonzero entries only
  std::vector<double> u;  ///< source potentials
  std::vector<double> v;  ///< target potentials, v[0] = 0
  double dual_objective = 0.0;
  double duality_gap = 0.0;        ///< |cost - dual_objective|
  double min_reduced_cost = 0.0;   ///< min over arcs of c_ij - u_i - v_j
  double max_marginal_error = 0.0;
  std::size_t pivots = 0;
};

/// Pairwise cost |x - y|^p, row-major over (a atoms) x (b atoms). p = 2 uses
/// the squared distance directly.
std::vector<double> cost_matrix(const std::vector<Point>& a, const std::vector<Point>& b, double p);

/// Exact optimal transport between weight vectors with a given cost matrix.
/// Throws imbalance when the total weights differ by more than 1e-10,
/// domain for p < 1 (when p is used) or an oversized problem, and
/// solver_failure when the optimality certificate (marginals within 1e-10,
/// reduced costs >= -1e-9 relative to the largest cost, complementary
/// slackness) does not hold.
ExactSolution solve_transport(const std::vector<double>& a, const std::vector<double>& b,
                              std::vector<double> cost, double p = 1.0);

/// W_p between two discrete measures with cost |x - y|^p.
ExactSolution solve_exact(const DiscreteMeasure& a, const DiscreteMeasure& b, double p);

/// Closed form W_p between the cell atoms and the i-th perturbed family:
/// mass sigma_i moves over distance r_i from each of the two atoms, so
/// W_p = r_i (2 sigma_i)^{1/p}.
double wasserstein_cell_perturbation(const CellInstance& inst, int i, double p);

/// Closed form W_p between the rotating pairs at angles 0 and theta:
/// |B_0 - B_theta| = 2 R sin(theta / 2) for both atoms.
double wasserstein_rotating(double R, double theta);

/// True iff the exact coupling between cell_atoms and perturbed_cell_atoms(i)
/// keeps every atom in place except the i-th pair, which moves B_i^+ to
/// C_i^+ and B_i^- to C_i^- entirely (i.e. the coupling is diagonal).
bool coupling_structure_check(const CellInstance& inst, int i, double p);

/// Debug exports. Rows: source index, target index, value.
void write_cost_csv(std::ostream& os, const DiscreteMeasure& a, const DiscreteMeasure& b, double p);
void write_coupling_csv(std::ostream& os, const ExactSolution& s);

}  // namespace otstab
