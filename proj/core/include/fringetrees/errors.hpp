#pragma once

#include <stdexcept>
#include <string>

namespace fringetrees {

enum class errc {
  empty_input,
  identity_violation,
  not_a_bridge,
  invalid_encoding,
  target_too_large,
  invalid_order,
  size_out_of_range,
  precision_loss,
  count_out_of_range,
  incompatible_size,
  attempts_exhausted,
  infeasible_target,
  nonpositive_sigma,
  nonpositive_input,
  empty_histogram,
  degenerate_range,
  degenerate_spread,
  underspecified_scenario,
  limit_exceeded,
  budget_exceeded,
  io_failure,
  config_error,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& msg) { throw Error(code, msg); }

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::empty_input: return "EmptyInput";
    case errc::identity_violation: return "IdentityViolation";
    case errc::not_a_bridge: return "NotABridge";
    case errc::invalid_encoding: return "InvalidEncoding";
    case errc::target_too_large: return "TargetTooLarge";
    case errc::invalid_order: return "InvalidOrder";
    case errc::size_out_of_range: return "SizeOutOfRange";
    case errc::precision_loss: return "PrecisionLoss";
    case errc::count_out_of_range: return "CountOutOfRange";
    case errc::incompatible_size: return "IncompatibleSize";
    case errc::attempts_exhausted: return "AttemptsExhausted";
    case errc::infeasible_target: return "InfeasibleTarget";
    case errc::nonpositive_sigma: return "NonpositiveSigma";
    case errc::nonpositive_input: return "NonpositiveInput";
    case errc::empty_histogram: return "EmptyHistogram";
    case errc::degenerate_range: return "DegenerateRange";
    case errc::degenerate_spread: return "DegenerateSpread";
    case errc::underspecified_scenario: return "UnderspecifiedScenario";
    case errc::limit_exceeded: return "LimitExceeded";
    case errc::budget_exceeded: return "BudgetExceeded";
    case errc::io_failure: return "IOFailure";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace fringetrees
