#include "otstab/discrete_ot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "otstab/error.hpp"
#include "otstab/network_simplex.hpp"

namespace otstab {
namespace {

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorKind::domain, "exponent p must be >= 1");
}

void write_number(std::ostream& os, double v) {
  const auto old = os.precision(17);
  os << v;
  os.precision(old);
}

}  // namespace

std::vector<double> cost_matrix(const std::vector<Point>& a, const std::vector<Point>& b, double p) {
  check_p(p);
  std::vector<double> c(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d2 = squared_distance(a[i], b[j]);
      c[i * b.size() + j] = p == 2.0 ? d2 : (p == 1.0 ? std::sqrt(d2) : std::pow(d2, 0.5 * p));
    }
  }
  return c;
}

ExactSolution solve_transport(const std::vector<double>& a, const std::vector<double>& b,
                              std::vector<double> cost, double p) {
  check_p(p);
  const std::size_t n1 = a.size(), n2 = b.size();
  if (n1 == 0 || n2 == 0) throw Error(ErrorKind::domain, "both measures need atoms");
  if (n1 * n2 > kMaxArcs) throw Error(ErrorKind::domain, "transport problem exceeds the arc limit");
  const double sa = std::accumulate(a.begin(), a.end(), 0.0);
  const double sb = std::accumulate(b.begin(), b.end(), 0.0);
  if (std::abs(sa - sb) > 1e-10 * std::max(1.0, sa)) {
    throw Error(ErrorKind::imbalance, "source and target weights have different totals");
  }
  double max_cost = 0.0;
  for (double c : cost) max_cost = std::max(max_cost, std::abs(c));
  const double scale = max_cost > 0.0 ? max_cost : 1.0;

  NetworkSimplex ns(a, b, std::move(cost));
  ns.run();

  ExactSolution s;
  s.p = p;
  s.pivots = ns.pivots();
  s.cost = ns.total_cost();
  s.wasserstein = std::pow(std::max(0.0, s.cost), 1.0 / p);
  // u_i = -pi_i, v_j = pi_j, shifted so that v_0 = 0
  s.u.resize(n1);
  s.v.resize(n2);
  for (std::size_t i = 0; i < n1; ++i) s.u[i] = -ns.potential_difference(i, n1);
  for (std::size_t j = 0; j < n2; ++j) s.v[j] = ns.potential_difference(n1 + j, n1);

  std::vector<double> row(n1, 0.0), col(n2, 0.0);
  s.min_reduced_cost = INFINITY;
  double max_slack_violation = 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double rc = ns.cost(i, j) - s.u[i] - s.v[j];
      s.min_reduced_cost = std::min(s.min_reduced_cost, rc);
      const double f = ns.flow(i, j);
      if (f > 0.0) {
        s.coupling.push_back({i, j, f});
        row[i] += f;
        col[j] += f;
        max_slack_violation = std::max(max_slack_violation, std::abs(rc));
      }
    }
  }
  for (std::size_t i = 0; i < n1; ++i) s.max_marginal_error = std::max(s.max_marginal_error, std::abs(row[i] - a[i]));
  for (std::size_t j = 0; j < n2; ++j) s.max_marginal_error = std::max(s.max_marginal_error, std::abs(col[j] - b[j]));
  s.dual_objective = 0.0;
  for (std::size_t i = 0; i < n1; ++i) s.dual_objective += a[i] * s.u[i];
  for (std::size_t j = 0; j < n2; ++j) s.dual_objective += b[j] * s.v[j];
  s.duality_gap = std::abs(s.cost - s.dual_objective);

  if (s.max_marginal_error > 1e-10) {
    throw Error(ErrorKind::solver_failure, "coupling marginals miss the weights by more than 1e-10");
  }
  if (s.min_reduced_cost < -1e-9 * scale || max_slack_violation > 1e-9 * scale) {
    throw Error(ErrorKind::solver_failure, "dual certificate failed");
  }
  return s;
}

ExactSolution solve_exact(const DiscreteMeasure& a, const DiscreteMeasure& b, double p) {
  check_p(p);
  if (a.dim() != b.dim()) throw Error(ErrorKind::invalid_dimension, "measures live in different dimensions");
  return solve_transport(a.weights(), b.weights(), cost_matrix(a.atoms(), b.atoms(), p), p);
}

double wasserstein_cell_perturbation(const CellInstance& inst, int i, double p) {
  inst.check_index(i);
  check_p(p);
  return inst.radius[i - 1] * std::pow(2.0 * inst.sigma[i - 1], 1.0 / p);
}

double wasserstein_rotating(double R, double theta) { return 2.0 * R * std::abs(std::sin(0.5 * theta)); }

bool coupling_structure_check(const CellInstance& inst, int i, double p) {
  const TargetFamily mu = cell_atoms(inst);
  const TargetFamily nu = perturbed_cell_atoms(inst, i);
  const ExactSolution s = solve_exact(mu.measure, nu.measure, p);
  std::vector<double> diagonal(mu.measure.size(), 0.0);
  for (const auto& e : s.coupling) {
    if (e.source != e.target) {
      if (e.mass > 1e-12 * mu.measure.weight(e.source)) return false;
      continue;
    }
    diagonal[e.source] += e.mass;
  }
  for (std::size_t k = 0; k < diagonal.size(); ++k) {
    const double w = mu.measure.weight(k);
    if (std::abs(diagonal[k] - w) > 1e-12 * w) return false;
  }
  return true;
}

void write_cost_csv(std::ostream& os, const DiscreteMeasure& a, const DiscreteMeasure& b, double p) {
  const auto c = cost_matrix(a.atoms(), b.atoms(), p);
  os << "source,target,cost\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      os << i << ',' << j << ',';
      write_number(os, c[i * b.size() + j]);
      os << '\n';
    }
  }
}

void write_coupling_csv(std::ostream& os, const ExactSolution& s) {
  os << "source,target,mass\n";
  for (const auto& e : s.coupling) {
    os << e.source << ',' << e.target << ',';
    write_number(os, e.mass);
    os << '\n';
  }
}

}  // namespace otstab
