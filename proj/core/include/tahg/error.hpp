#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tahg {

enum class ErrorCode {
  // tahg-core
  EmptyHyperedge,
  NodeIdOutOfRange,
  HyperedgeIdOutOfRange,
  NonPositiveWeight,
  InvalidS,
  InvalidGraph,
  // text-embed
  NoPositivePool,
  NoNegativePool,
  ZeroVector,
  NoEligibleNodes,
  // augment / hgnn / objectives
  ZeroFeatureRow,
  NonPositiveTemperature,
  DimensionMismatch,
  NonFiniteInput,
  MissingForwardCache,
  EmptySubgraph,
  ZeroRow,
  InvalidRatio,
  IsolatedCenter,
  // trainer / eval
  NonFiniteLoss,
  DegenerateSplit,
  NoEligibleNegative,
  InvalidConfig,
  // io / cli
  ParseError,
  InvariantViolation,
  EmptyDataset,
  BadFormat,
  IoError,
  InvalidParams,
  MissingRuns,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every recoverable failure in the library is reported as a tahg::Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace tahg
