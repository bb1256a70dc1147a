#pragma once

#include <stdexcept>
#include <string>

namespace demoreplay {

// Base type for all library faults. Specific errors below so callers can
// distinguish recoverable conditions (e.g. DivergedTracking during a grid
// sweep) from genuine faults.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SO(3) logarithm requested within the branch-ambiguous band around pi.
struct AngleNearPi : Error {
  using Error::Error;
};

// Matrix used to construct a Rotation fails the orthonormality/det checks.
struct InvalidRotation : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// det(J J^T) is identically zero because the model has fewer joints than
// task rows; signals a misconfigured model, not a singular configuration.
struct RankDeficientModel : Error {
  using Error::Error;
};

struct NonFinite : Error {
  using Error::Error;
};

// Task-space tracking error exceeded the configured bound; the demonstration
// is unreachable from this base pose / initial configuration.
struct DivergedTracking : Error {
  using Error::Error;
};

struct ZeroDuration : Error {
  using Error::Error;
};

struct AllDiverged : Error {
  using Error::Error;
};

struct TooFewMarkers : Error {
  using Error::Error;
};

struct DegenerateGeometry : Error {
  using Error::Error;
};

struct NoRegistrableFrames : Error {
  using Error::Error;
};

struct DegenerateComponent : Error {
  using Error::Error;
};

struct TorqueLimitExceeded : Error {
  using Error::Error;
};

struct FrameMismatch : Error {
  using Error::Error;
};

struct NoOverlap : Error {
  using Error::Error;
};

struct WindowOutOfRange : Error {
  using Error::Error;
};

// Malformed input file or unparseable field.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace demoreplay
