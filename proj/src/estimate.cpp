#include "otstab/estimate.hpp"

#include <algorithm>
#include <cmath>

namespace otstab {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::closed_form: return "closed-form";
    case Method::quadrature: return "quadrature";
    case Method::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

double RunningMoments::mean() const noexcept { return count == 0 ? 0.0 : sum / count; }

double RunningMoments::standard_error() const noexcept {
  if (count < 2) return 0.0;
  const double n = static_cast<double>(count);
  const double m = sum / n;
  const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
  return std::sqrt(var / n);
}

Estimate RunningMoments::estimate() const noexcept {
  return Estimate{mean(), standard_error(), Method::monte_carlo, count};
}

}  // namespace otstab
