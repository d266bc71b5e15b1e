#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace otstab {

enum class ErrorKind {
  invalid_dimension,
  domain,
  unsupported_kind,
  unsupported_method,
  precision,
  sampler_degenerate,
  undefined_direction,
  outside_support,
  certificate_failure,
  pushforward_failure,
  imbalance,
  index_out_of_range,
  internal_consistency,
  solver_failure,
  fit,
  no_witness_guarantee,
  config,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. The kind lets callers (and the CLI's
/// exit-code mapping) distinguish numerical failures from bad input.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace otstab
