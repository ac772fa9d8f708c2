#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coverstore {

enum class ErrorCode {
  // lattice
  kInvalidIdentifier,
  kDuplicateLevel,
  kUnknownLevelInOrder,
  kCycleDetected,
  kNotALattice,
  kUnknownLevel,
  // model
  kDuplicateEntry,
  kNotFound,
  kArityMismatch,
  kMalformed,
  // lang
  kSyntaxError,
  kSemanticError,
  kUnboundVariable,
  // txn
  kClearanceTooLow,
  kWrongLevelWrite,
  kStaleTransaction,
  kNoTransaction,
  // restore
  kEmptyDisjunction,
  // admin
  kUnknownPending,
  kAlreadyClosed,
  kInvalidChoice,
  kRedundantTrigger,
  kNotTrusted,
  kInvalidConfig,
};

std::string_view error_code_name(ErrorCode code);

struct SourceSpan {
  int line = 1;
  int column = 1;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

// Single exception type for the engine. Parse errors carry the span of the
// offending token.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  Error(ErrorCode code, SourceSpan span, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<SourceSpan>& span() const noexcept { return span_; }
  // Message without the code/span prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::optional<SourceSpan> span_;
  std::string detail_;
};

}  // namespace coverstore
