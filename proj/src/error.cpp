#include "ugmae/error.hpp"

namespace ugmae {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidEdge: return "InvalidEdge";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kDuplicateEdge: return "DuplicateEdge";
    case ErrorKind::kInvalidRate: return "InvalidRate";
    case ErrorKind::kNonFiniteInput: return "NonFiniteInput";
    case ErrorKind::kNumericalUnderflow: return "NumericalUnderflow";
    case ErrorKind::kEmptyMaskSet: return "EmptyMaskSet";
    case ErrorKind::kCannotSampleNegative: return "CannotSampleNegative";
    case ErrorKind::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::kDegenerateSplit: return "DegenerateSplit";
    case ErrorKind::kInsufficientData: return "InsufficientData";
    case ErrorKind::kFormatError: return "FormatError";
    case ErrorKind::kInvalidNodeId: return "InvalidNodeId";
    case ErrorKind::kIncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorKind::kMissingLabels: return "MissingLabels";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace ugmae
