#include "secagg/error.hpp"

namespace secagg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::infeasible_parameters: return "infeasible-parameters";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::missing_reply: return "missing-reply";
    case ErrorCode::protocol_abort: return "protocol-abort";
    case ErrorCode::invalid_subset: return "invalid-subset";
    case ErrorCode::duplicate_client_id: return "duplicate-client-id";
    case ErrorCode::aborted_input: return "aborted-input";
    case ErrorCode::unknown_party: return "unknown-party";
    case ErrorCode::scenario_invalid: return "scenario-invalid";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::config_invalid: return "config-invalid";
  }
  return "unknown";
}

}  // namespace secagg
