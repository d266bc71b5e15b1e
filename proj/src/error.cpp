#include "otstab/error.hpp"

namespace otstab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::unsupported_kind: return "unsupported-kind";
    case ErrorKind::unsupported_method: return "unsupported-method";
    case ErrorKind::precision: return "precision";
    case ErrorKind::sampler_degenerate: return "sampler-degenerate";
    case ErrorKind::undefined_direction: return "undefined-direction";
    case ErrorKind::outside_support: return "outside-support";
    case ErrorKind::certificate_failure: return "certificate-failure";
    case ErrorKind::pushforward_failure: return "pushforward-failure";
    case ErrorKind::imbalance: return "imbalance";
    case ErrorKind::index_out_of_range: return "index-out-of-range";
    case ErrorKind::internal_consistency: return "internal-consistency";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::fit: return "fit";
    case ErrorKind::no_witness_guarantee: return "no-witness-guarantee";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

}  // namespace otstab
