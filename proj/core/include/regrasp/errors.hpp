#pragma once

#include <stdexcept>
#include <string>

namespace regrasp {

enum class ErrorCode {
  // geometry / camera
  NonPositiveDepth,
  ZeroDisparity,
  DegeneratePoints,
  ChordTooLong,
  // perception
  TooFewPoints,
  NoValidCandidate,
  NoInliers,
  InsufficientObservation,
  // kinematics
  Unreachable,
  BothUnreachable,
  // servoing
  EstimationFailed,
  NotConverged,
  AcquisitionFailed,
  PositioningFailed,
  // grasping
  GripperOffscreen,
  MaxStepsExceeded,
  DegenerateDemos,
  GraspMissed,
  // harness
  IoFailure,
  InvalidConfig,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::ZeroDisparity: return "ZeroDisparity";
    case ErrorCode::DegeneratePoints: return "DegeneratePoints";
    case ErrorCode::ChordTooLong: return "ChordTooLong";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoValidCandidate: return "NoValidCandidate";
    case ErrorCode::NoInliers: return "NoInliers";
    case ErrorCode::InsufficientObservation: return "InsufficientObservation";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::BothUnreachable: return "BothUnreachable";
    case ErrorCode::EstimationFailed: return "EstimationFailed";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::AcquisitionFailed: return "AcquisitionFailed";
    case ErrorCode::PositioningFailed: return "PositioningFailed";
    case ErrorCode::GripperOffscreen: return "GripperOffscreen";
    case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorCode::DegenerateDemos: return "DegenerateDemos";
    case ErrorCode::GraspMissed: return "GraspMissed";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace regrasp
