#pragma once

#include <stdexcept>
#include <string>

namespace minimax {

enum class ErrorCode {
  dimension_mismatch,
  empty_input,
  empty_group,
  invalid_design,
  theta_unknown,
  singular_design,
  wrong_shape,
  rank_deficient,
  invalid_parameter,
  duality_gap,
  solver_failure,
  unsupported,
  insufficient_data,
};

const char* to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type; the
// code lets callers (the CLI in particular) map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace minimax
