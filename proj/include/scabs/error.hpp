#pragma once

#include <stdexcept>
#include <string>

namespace scabs {

enum class Errc {
  InvalidArgument,
  CellTooLarge,
  SingularJacobian,
  FlowEscape,
  HessianUnavailable,
  ConditionsViolated,
  NoAdmissibleScale,
  HorizonExceeded,
  PolicyGap,
  ConfigError,
  PluginError,
};

inline const char* to_string(Errc e) {
  switch (e) {
    case Errc::InvalidArgument: return "INVALID_ARGUMENT";
    case Errc::CellTooLarge: return "CELL_TOO_LARGE";
    case Errc::SingularJacobian: return "SINGULAR_JACOBIAN";
    case Errc::FlowEscape: return "FLOW_ESCAPE";
    case Errc::HessianUnavailable: return "HESSIAN_UNAVAILABLE";
    case Errc::ConditionsViolated: return "CONDITIONS_VIOLATED";
    case Errc::NoAdmissibleScale: return "NO_ADMISSIBLE_SCALE";
    case Errc::HorizonExceeded: return "HORIZON_EXCEEDED";
    case Errc::PolicyGap: return "POLICY_GAP";
    case Errc::ConfigError: return "CONFIG_ERROR";
    case Errc::PluginError: return "PLUGIN_ERROR";
  }
  return "UNKNOWN";
}

/// Exception carrying one of the library error codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace scabs
