#include "coneray/errors.hpp"

namespace coneray {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::MissingLevel: return "MissingLevel";
        case ErrorKind::RootFindingFailure: return "RootFindingFailure";
        case ErrorKind::BoundaryRoot: return "BoundaryRoot";
        case ErrorKind::ResonantCorrection: return "ResonantCorrection";
        case ErrorKind::OutsideBackgroundResolvent: return "OutsideBackgroundResolvent";
        case ErrorKind::ConnectionFailure: return "ConnectionFailure";
        case ErrorKind::InvalidProbe: return "InvalidProbe";
        case ErrorKind::InvalidDilation: return "InvalidDilation";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::SpectrumHit: return "SpectrumHit";
        case ErrorKind::QuadratureFailure: return "QuadratureFailure";
        case ErrorKind::IndeterminateVerdict: return "IndeterminateVerdict";
        case ErrorKind::IndexInconsistency: return "IndexInconsistency";
        case ErrorKind::MeshRefinementNeeded: return "MeshRefinementNeeded";
        case ErrorKind::PreconditionViolation: return "PreconditionViolation";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::IOFailure: return "IOFailure";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

ResonanceError::ResonanceError(int level, const std::string& what)
    : Error(ErrorKind::ResonantCorrection, what), level_(level) {}

RootFindingError::RootFindingError(int mode, const std::string& what)
    : Error(ErrorKind::RootFindingFailure, what), mode_(mode) {}

}  // namespace coneray
