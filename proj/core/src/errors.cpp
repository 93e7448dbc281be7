#include "ncrat/errors.hpp"

namespace ncrat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NotRegularAtZero: return "NotRegularAtZero";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SingularQ0: return "SingularQ0";
    case ErrorCode::NotSignature: return "NotSignature";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NearSingularResolvent: return "NearSingularResolvent";
    case ErrorCode::SingularG: return "SingularG";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BoundaryLimitUnstable: return "BoundaryLimitUnstable";
    case ErrorCode::NotSelfadjointInput: return "NotSelfadjointInput";
    case ErrorCode::DomainStarved: return "DomainStarved";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string& message,
             nlohmann::json payload)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      module_(std::move(module)),
      payload_(std::move(payload)) {}

nlohmann::json Error::to_json() const {
  return {{"error", std::string(to_string(code_))},
          {"module", module_},
          {"message", what()},
          {"payload", payload_}};
}

}  // namespace ncrat
