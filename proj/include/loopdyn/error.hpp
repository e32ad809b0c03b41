#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loopdyn {

enum class ErrorKind {
  ZeroMassBody,
  NonFiniteState,
  NonFiniteLambda,
  SingularSystem,
  InconsistentInitialConditions,
  UnknownBody,
  MotorOnUnsupportedJoint,
  SchemaError,
  DanglingReference,
  ChainOrderError,
  ConfigError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroMassBody: return "ZeroMassBody";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::NonFiniteLambda: return "NonFiniteLambda";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::InconsistentInitialConditions: return "InconsistentInitialConditions";
    case ErrorKind::UnknownBody: return "UnknownBody";
    case ErrorKind::MotorOnUnsupportedJoint: return "MotorOnUnsupportedJoint";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::ChainOrderError: return "ChainOrderError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Single exception type for the engine; `kind()` carries the taxonomy and
/// `step()` the 1-based step index when raised from inside a simulation.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, long step = -1)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), step_(step) {}

  ErrorKind kind() const noexcept { return kind_; }
  long step() const noexcept { return step_; }

  Error at_step(long step) const {
    Error copy = *this;
    copy.step_ = step;
    return copy;
  }

 private:
  ErrorKind kind_;
  long step_;
};

}  // namespace loopdyn
