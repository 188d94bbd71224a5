#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coneray {

enum class ErrorKind {
    InvalidSpec,
    MissingLevel,
    RootFindingFailure,
    BoundaryRoot,
    ResonantCorrection,
    OutsideBackgroundResolvent,
    ConnectionFailure,
    InvalidProbe,
    InvalidDilation,
    DimensionMismatch,
    SpectrumHit,
    QuadratureFailure,
    IndeterminateVerdict,
    IndexInconsistency,
    MeshRefinementNeeded,
    PreconditionViolation,
    InvalidConfig,
    IOFailure,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Resonance in the level recursion; level() is the offending l.
class ResonanceError : public Error {
public:
    ResonanceError(int level, const std::string& what);

    int level() const noexcept { return level_; }

private:
    int level_;
};

// Root finder failure for one mode's polynomial.
class RootFindingError : public Error {
public:
    RootFindingError(int mode, const std::string& what);

    int mode() const noexcept { return mode_; }

private:
    int mode_;
};

}  // namespace coneray
