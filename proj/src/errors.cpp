#include "lojlab/errors.hpp"

namespace lojlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Stiffness: return "stiffness";
    case ErrorKind::EnvelopeNotApplicable: return "envelope-not-applicable";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::BlowUp: return "blow-up";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

}  // namespace lojlab
