#pragma once

#include <stdexcept>
#include <string>

namespace droid {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A config value violates a documented invariant (bad gain, non-finite mean, ...).
struct InvalidConfigError : Error {
  using Error::Error;
};

/// An operation received arguments that violate its preconditions (size mismatch, empty set, ...).
struct InvalidInputError : Error {
  using Error::Error;
};

/// Positivity-constrained sampling exhausted its redraw budget; the search
/// distribution has drifted so negative-heavy that feasible draws are near-impossible.
struct InfeasibleDistributionError : Error {
  using Error::Error;
};

/// A Cartesian target lies outside the arm workspace.
struct OutOfWorkspaceError : Error {
  using Error::Error;
};

/// Integration produced a non-finite state.
struct SimulationDivergedError : Error {
  using Error::Error;
};

/// A policy-gradient update produced a non-finite loss.
struct DivergedUpdateError : Error {
  using Error::Error;
};

/// A pipeline stage was requested before the artifacts it consumes exist.
struct StageDependencyError : Error {
  using Error::Error;
};

/// Filesystem read/write failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace droid
