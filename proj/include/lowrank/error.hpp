#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lowrank {

// Error categories map one-to-one onto CLI exit statuses.
enum class ErrorKind {
  kArgument,       // malformed or out-of-range input
  kConfiguration,  // valid input rejected by policy (e.g. K <= 1 without opt-in)
  kInfeasible,     // penalty regime or variance estimate undefined at these dimensions
  kNumerical,      // iteration cap hit, quadrature failure
  kIo,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Stable machine-readable identifier, e.g. "variance-not-estimable".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void throw_argument(const std::string& message) {
  throw Error(ErrorKind::kArgument, "invalid-argument", message);
}

[[noreturn]] inline void throw_infeasible(std::string code, const std::string& message) {
  throw Error(ErrorKind::kInfeasible, std::move(code), message);
}

}  // namespace lowrank
