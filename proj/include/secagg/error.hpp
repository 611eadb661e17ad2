#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace secagg {

enum class ErrorCode {
  invalid_parameter,
  infeasible_parameters,
  dimension_mismatch,
  missing_reply,
  protocol_abort,
  invalid_subset,
  duplicate_client_id,
  aborted_input,
  unknown_party,
  scenario_invalid,
  shape_mismatch,
  config_invalid,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace secagg
