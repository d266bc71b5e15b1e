#include "otstab/discrete_measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "otstab/error.hpp"

namespace otstab {
namespace {

void check_atoms(const std::vector<Point>& atoms, const std::vector<double>& weights) {
  if (atoms.size() != weights.size()) {
    throw Error(ErrorKind::domain, "atom and weight counts differ");
  }
  if (atoms.empty()) throw Error(ErrorKind::domain, "discrete measure needs at least one atom");
  const int d = atoms.front().dim();
  for (const Point& a : atoms) {
    if (a.dim() != d) throw Error(ErrorKind::invalid_dimension, "atoms have mixed dimensions");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::domain, "weights must be nonnegative");
  }
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  auto coords_less = [&](std::size_t a, std::size_t b) {
    const auto ca = atoms[a].coords();
    const auto cb = atoms[b].coords();
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  };
  std::sort(order.begin(), order.end(), coords_less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (atoms[order[k]] == atoms[order[k - 1]]) {
      throw Error(ErrorKind::domain, "atoms must be pairwise distinct");
    }
  }
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Point> atoms, std::vector<double> weights) {
  check_atoms(atoms, weights);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::imbalance, "weights must sum to 1");
  }
  atoms_ = std::move(atoms);
  weights_ = std::move(weights);
}

DiscreteMeasure DiscreteMeasure::unnormalized(std::vector<Point> atoms, std::vector<double> weights) {
  check_atoms(atoms, weights);
  DiscreteMeasure m;
  m.atoms_ = std::move(atoms);
  m.weights_ = std::move(weights);
  return m;
}

double DiscreteMeasure::total_weight() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

nlohmann::json to_json(const DiscreteMeasure& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (std::size_t j = 0; j < m.size(); ++j) {
    const auto c = m.atom(j).coords();
    atoms.push_back({{"x", std::vector<double>(c.begin(), c.end())}, {"w", m.weight(j)}});
  }
  return atoms;
}

}  // namespace otstab
