#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace driftlab {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  RankDeficient,
  OutOfDomain,
  NonFiniteState,
  InsufficientCoverage,
  KernelNotStochastic,
  NotBoundaryCase,
  Reducible,
  Periodic,
  SingularDiffusion,
  ExcessiveTruncation,
  NotReachable,
  NotOrthogonal,
  ConfigInvalid,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure surfaced by the toolkit.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A simulated state left the reals. Carries where it happened.
class NonFiniteStateError : public Error {
 public:
  NonFiniteStateError(std::int64_t time, std::int64_t index, const std::string& what)
      : Error(ErrorKind::NonFiniteState, what), time_(time), index_(index) {}

  std::int64_t time() const noexcept { return time_; }
  /// Trajectory index for ensembles, sample index for one-state estimators.
  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t time_;
  std::int64_t index_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::InsufficientCoverage: return "InsufficientCoverage";
    case ErrorKind::KernelNotStochastic: return "KernelNotStochastic";
    case ErrorKind::NotBoundaryCase: return "NotBoundaryCase";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::Periodic: return "Periodic";
    case ErrorKind::SingularDiffusion: return "SingularDiffusion";
    case ErrorKind::ExcessiveTruncation: return "ExcessiveTruncation";
    case ErrorKind::NotReachable: return "NotReachable";
    case ErrorKind::NotOrthogonal: return "NotOrthogonal";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace driftlab
