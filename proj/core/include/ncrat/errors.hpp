#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace ncrat {

enum class ErrorCode {
  SingularBlock,
  NotHermitian,
  ConvergenceFailure,
  SyntaxError,
  ArityError,
  DomainError,
  NotRegularAtZero,
  ShapeMismatch,
  SingularQ0,
  NotSignature,
  DimensionMismatch,
  NearSingularResolvent,
  SingularG,
  NoConvergence,
  BoundaryLimitUnstable,
  NotSelfadjointInput,
  DomainStarved,
  EmptyPool,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every library failure is thrown as an Error. The payload carries the
// machine-readable details (failing path, iteration counts, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message,
        nlohmann::json payload = nlohmann::json::object());

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const nlohmann::json& payload() const noexcept { return payload_; }

  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  std::string module_;
  nlohmann::json payload_;
};

}  // namespace ncrat
