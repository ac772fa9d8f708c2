#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coverstore/model.hpp"
#include "coverstore/restore.hpp"

namespace coverstore {

class Store;

struct Alert {
  enum class Kind { kPostCommitInsecure, kEmptyDisjunction, kIterationCap };

  std::uint64_t id = 0;
  Kind kind = Kind::kPostCommitInsecure;
  std::string detail;
  bool resolved = false;
  std::optional<std::string> timestamp;
};

const char* alert_kind_name(Alert::Kind k);

struct PendingDisjunction {
  std::uint64_t id = 0;
  CoverDisjunction disjunction;
  bool open = true;
};

// Alert log, pending-disjunction registry and audit trail. Owned by a Store;
// everything here travels the trusted path.
class AdminRegistry {
 public:
  using AuditSink = std::function<void(const std::string&)>;

  // With `deterministic`, alerts carry no timestamp.
  explicit AdminRegistry(bool deterministic = true) : deterministic_(deterministic) {}

  void set_audit_sink(AuditSink sink) { sink_ = std::move(sink); }

  const Alert& raise_alert(Alert::Kind kind, std::string detail);
  const std::vector<Alert>& alerts() const { return alerts_; }
  void resolve_alerts();

  const std::vector<PendingDisjunction>& pending() const { return pending_; }
  // Open entries whose level is dominated by `clearance`.
  std::vector<PendingDisjunction> visible_pending(const Lattice& lat, const SecurityLevel& clearance) const;
  const PendingDisjunction* find_pending(std::uint64_t id) const;
  void close_pending(std::uint64_t id, const std::string& why);

  // Records a restoration: logs its actions, opens an entry for each new
  // pending disjunction (raising alerts for empty ones and for an iteration
  // cap) and closes open entries the outcome no longer lists.
  void record_restore(const RestoreOutcome& outcome);
  // The database is secure again: closes every open entry and marks alerts
  // resolved.
  void record_secure();

  // Appends one line to the audit trail.
  void audit(std::string line);
  const std::vector<std::string>& audit_log() const { return audit_; }

 private:
  bool deterministic_;
  AuditSink sink_;
  std::vector<Alert> alerts_;
  std::vector<PendingDisjunction> pending_;
  std::vector<std::string> audit_;
  std::uint64_t next_alert_ = 1;
  std::uint64_t next_pending_ = 1;
};

// An SA decision on a pending disjunction: the index of the disjunct taken as
// the cover story, or an arbitrary list of trusted changes.
struct ExternalAction {
  std::vector<Change> changes;
};
using SaChoice = std::variant<std::size_t, ExternalAction>;

// Applies the choice through the trusted path, closes the entry, then
// re-checks security at top and restores if needed. Throws kUnknownPending,
// kAlreadyClosed, kInvalidChoice, or model errors (store unchanged).
Database sa_resolve(Store& store, std::uint64_t pending_id, const SaChoice& choice);

// Sets the trigger flag on an existing fact cover declaration (matched by
// target and level). Throws kNotFound or kRedundantTrigger (pointers).
Database register_trigger(Store& store, const CoverStoryDecl& decl);

}  // namespace coverstore
