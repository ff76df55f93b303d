#include "cfrelax/error.hpp"

namespace cfrelax {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::BadParameter: return "BadParameter";
    case ErrorKind::EigFailure: return "EigFailure";
    case ErrorKind::KernelUnderresolved: return "KernelUnderresolved";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::StabilityViolation: return "StabilityViolation";
    case ErrorKind::KappaOutsideK: return "KappaOutsideK";
    case ErrorKind::SupportPrecheckFailed: return "SupportPrecheckFailed";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace cfrelax
