#include "cf/errors.hpp"

namespace cf {

const char* error_kind_name(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::UnitCertificateViolated: return "UnitCertificateViolated";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::UnsupportedZeroTest: return "UnsupportedZeroTest";
    case ErrorKind::InconsistentOrientation: return "InconsistentOrientation";
    case ErrorKind::NotPrepared: return "NotPrepared";
    case ErrorKind::FragmentEscape: return "FragmentEscape";
    case ErrorKind::EqualCenters: return "EqualCenters";
    case ErrorKind::NotDetermined: return "NotDetermined";
    case ErrorKind::NotCase2: return "NotCase2";
    case ErrorKind::NotBounded: return "NotBounded";
    case ErrorKind::NotAllUndetermined: return "NotAllUndetermined";
    case ErrorKind::EmptyExpr: return "EmptyExpr";
    case ErrorKind::NoDecay: return "NoDecay";
    case ErrorKind::NotIntegrable: return "NotIntegrable";
    case ErrorKind::BoundUnitUnsupported: return "BoundUnitUnsupported";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::SingularityTooStrong: return "SingularityTooStrong";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace cf
