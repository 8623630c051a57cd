#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ideval {

enum class ErrorCode {
  InvalidConfig,
  Io,
  ParseError,
  InvalidWeight,
  MissingWeight,
  InvalidClustering,
  ItemUniverseMismatch,
  EmptyIntersection,
  DuplicateEpochLabel,
  UnknownElement,
  MissingIdealClass,
  UniverseMismatch,
  NotABijection,
  NothingToSample,
  UnknownPair,
  InconsistentJudgements,
  InsufficientCoverage,
};

std::string_view errorCodeName(ErrorCode code);

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ideval
