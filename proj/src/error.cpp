#include "coverstore/error.hpp"

namespace coverstore {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidIdentifier: return "InvalidIdentifier";
    case ErrorCode::kDuplicateLevel: return "DuplicateLevel";
    case ErrorCode::kUnknownLevelInOrder: return "UnknownLevelInOrder";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kNotALattice: return "NotALattice";
    case ErrorCode::kUnknownLevel: return "UnknownLevel";
    case ErrorCode::kDuplicateEntry: return "DuplicateEntry";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kMalformed: return "Malformed";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kSemanticError: return "SemanticError";
    case ErrorCode::kUnboundVariable: return "UnboundVariable";
    case ErrorCode::kClearanceTooLow: return "ClearanceTooLow";
    case ErrorCode::kWrongLevelWrite: return "WrongLevelWrite";
    case ErrorCode::kStaleTransaction: return "StaleTransaction";
    case ErrorCode::kNoTransaction: return "NoTransaction";
    case ErrorCode::kEmptyDisjunction: return "EmptyDisjunction";
    case ErrorCode::kUnknownPending: return "UnknownPending";
    case ErrorCode::kAlreadyClosed: return "AlreadyClosed";
    case ErrorCode::kInvalidChoice: return "InvalidChoice";
    case ErrorCode::kRedundantTrigger: return "RedundantTrigger";
    case ErrorCode::kNotTrusted: return "NotTrusted";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::optional<SourceSpan>& span,
                           const std::string& message) {
  std::string out(error_code_name(code));
  if (span) {
    out += " at " + std::to_string(span->line) + ":" + std::to_string(span->column);
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(format_message(code, std::nullopt, message)),
      code_(code),
      detail_(message) {}

Error::Error(ErrorCode code, SourceSpan span, const std::string& message)
    : std::runtime_error(format_message(code, span, message)),
      code_(code),
      span_(span),
      detail_(message) {}

}  // namespace coverstore
