#pragma once

#include <cstddef>
#include <string_view>

namespace otstab {

enum class Method { closed_form, quadrature, monte_carlo };

std::string_view to_string(Method m);

/// A number together with how it was obtained. `standard_error` is zero for
/// closed forms and carries the quadrature error estimate for quadrature.
struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  Method method = Method::closed_form;
  std::size_t samples = 0;
};

/// Mean and standard error of the mean from running sums.
struct RunningMoments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double v) noexcept {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  void merge(const RunningMoments& o) noexcept {
    sum += o.sum;
    sum_sq += o.sum_sq;
    count += o.count;
  }
  double mean() const noexcept;
  double standard_error() const noexcept;
  Estimate estimate() const noexcept;
};

}  // namespace otstab
