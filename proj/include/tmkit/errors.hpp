#pragma once

#include <stdexcept>
#include <string>

namespace tmkit {

enum class Errc {
  UnknownParent,
  DuplicateSiblingName,
  UnknownThimac,
  DirectionOnNonTransfer,
  DuplicateLabel,
  UnknownStage,
  GuardOnFlow,
  EmptyRegion,
  ForeignStage,
  UnknownLabel,
  UnknownEvent,
  IntraInstanceCycle,
  UnresolvedGuard,
  TickBudgetExceeded,
  UnsupportedConstruct,
  XmlError,
  DanglingRef,
  ScenarioError,
  IoError,
};

inline const char* to_string(Errc c) {
  switch (c) {
    case Errc::UnknownParent: return "UnknownParent";
    case Errc::DuplicateSiblingName: return "DuplicateSiblingName";
    case Errc::UnknownThimac: return "UnknownThimac";
    case Errc::DirectionOnNonTransfer: return "DirectionOnNonTransfer";
    case Errc::DuplicateLabel: return "DuplicateLabel";
    case Errc::UnknownStage: return "UnknownStage";
    case Errc::GuardOnFlow: return "GuardOnFlow";
    case Errc::EmptyRegion: return "EmptyRegion";
    case Errc::ForeignStage: return "ForeignStage";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::UnknownEvent: return "UnknownEvent";
    case Errc::IntraInstanceCycle: return "IntraInstanceCycle";
    case Errc::UnresolvedGuard: return "UnresolvedGuard";
    case Errc::TickBudgetExceeded: return "TickBudgetExceeded";
    case Errc::UnsupportedConstruct: return "UnsupportedConstruct";
    case Errc::XmlError: return "XmlError";
    case Errc::DanglingRef: return "DanglingRef";
    case Errc::ScenarioError: return "ScenarioError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Thrown by construction and engine entry points; validation-style passes
/// report through Diagnostics instead.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace tmkit
