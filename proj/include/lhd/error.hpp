#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lhd {

enum class ErrorCode {
  invalid_dimension,
  index_out_of_range,
  unsupported_exponent,
  indivisible_runs,
  degenerate_coordinate,
  too_few_columns,
  invalid_weight,
  invalid_config,
  invalid_oa,
  invalid_parameter,
  dimension_mismatch,
  unknown_name,
  invalid_design,
  out_of_range_entry,
  io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::unsupported_exponent: return "unsupported-exponent";
    case ErrorCode::indivisible_runs: return "indivisible-runs";
    case ErrorCode::degenerate_coordinate: return "degenerate-coordinate";
    case ErrorCode::too_few_columns: return "too-few-columns";
    case ErrorCode::invalid_weight: return "invalid-weight";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::invalid_oa: return "invalid-oa";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::unknown_name: return "unknown-name";
    case ErrorCode::invalid_design: return "invalid-design";
    case ErrorCode::out_of_range_entry: return "out-of-range-entry";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace lhd
