#include "tahg/error.hpp"

namespace tahg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyHyperedge: return "EmptyHyperedge";
    case ErrorCode::NodeIdOutOfRange: return "NodeIdOutOfRange";
    case ErrorCode::HyperedgeIdOutOfRange: return "HyperedgeIdOutOfRange";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::InvalidS: return "InvalidS";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::NoPositivePool: return "NoPositivePool";
    case ErrorCode::NoNegativePool: return "NoNegativePool";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NoEligibleNodes: return "NoEligibleNodes";
    case ErrorCode::ZeroFeatureRow: return "ZeroFeatureRow";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::MissingForwardCache: return "MissingForwardCache";
    case ErrorCode::EmptySubgraph: return "EmptySubgraph";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::IsolatedCenter: return "IsolatedCenter";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::NoEligibleNegative: return "NoEligibleNegative";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::MissingRuns: return "MissingRuns";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace tahg
