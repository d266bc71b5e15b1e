#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "otstab/geometry.hpp"

namespace otstab {

/// Finitely supported probability measure. Construction checks that weights
/// are nonnegative, sum to 1 within 1e-12 and that atoms are pairwise
/// distinct.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(std::vector<Point> atoms, std::vector<double> weights);

  /// Skips the unit-sum check (weights still nonnegative, atoms distinct);
  /// used for empirical measures built from weighted samples.
  static DiscreteMeasure unnormalized(std::vector<Point> atoms, std::vector<double> weights);

  std::size_t size() const noexcept { return atoms_.size(); }
  int dim() const noexcept { return atoms_.empty() ? 0 : atoms_.front().dim(); }
  const std::vector<Point>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const Point& atom(std::size_t j) const { return atoms_.at(j); }
  double weight(std::size_t j) const { return weights_.at(j); }
  double total_weight() const noexcept;

 private:
  std::vector<Point> atoms_;
  std::vector<double> weights_;
};

nlohmann::json to_json(const DiscreteMeasure& m);

}  // namespace otstab
