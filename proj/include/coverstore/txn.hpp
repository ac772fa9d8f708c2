#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "coverstore/admin.hpp"
#include "coverstore/guard.hpp"
#include "coverstore/lang.hpp"
#include "coverstore/model.hpp"
#include "coverstore/restore.hpp"

namespace coverstore {

// A single-level transaction. Obtained from Store::begin.
class Transaction {
 public:
  const SecurityLevel& level() const { return level_; }
  const Database& base() const { return *base_; }
  // base plus the changes so far.
  const Database& working() const { return working_; }
  const std::vector<Change>& changes() const { return changes_; }

 private:
  friend class Store;
  friend void txn_write(Transaction& txn, const Change& change);
  Transaction(SecurityLevel level, std::shared_ptr<const Database> base, std::uint64_t version)
      : level_(std::move(level)), base_(base), working_(*base), version_(version) {}

  SecurityLevel level_;
  std::shared_ptr<const Database> base_;
  Database working_;
  std::vector<Change> changes_;
  std::uint64_t version_;
};

struct ReadResult {
  std::vector<ClassifiedFact> facts;
  std::vector<ClassifiedConstraint> constraints;  // those mentioning the predicate
  std::vector<CoverStoryDecl> covers;
};

// No-read-up: matches come only from view_at(working, level).
ReadResult txn_read(const Transaction& txn, const AtomQuery& pattern);

// Throws kWrongLevelWrite unless the change is written at the transaction
// level; model errors leave the transaction unchanged.
void txn_write(Transaction& txn, const Change& change);

struct Committed {
  Database db;                                  // installed state, after any restoration
  bool global_secure = true;                    // before restoration
  std::optional<std::uint64_t> alert_id;
  std::vector<CoverStoryDecl> trigger_inserts;  // trusted trigger effects
  std::optional<RestoreOutcome> restore;
};

struct Rejected {
  SecurityReport report;
};

using CommitOutcome = std::variant<Committed, Rejected>;

struct TrustedOutcome {
  Database db;
  bool global_secure = true;
  std::optional<RestoreOutcome> restore;
};

// Holds the current database. One writer at a time; readers take immutable
// snapshots and never block on commits.
class Store {
 public:
  explicit Store(Database db, RestoreConfig cfg = {}, bool deterministic = true);

  std::shared_ptr<const Database> snapshot() const;
  std::uint64_t version() const;
  const RestoreConfig& config() const { return cfg_; }
  AdminRegistry& admin() { return admin_; }
  const AdminRegistry& admin() const { return admin_; }

  // Throws kClearanceTooLow or kUnknownLevel.
  Transaction begin(const SecurityLevel& level, const SecurityLevel& clearance) const;

  // Throws kStaleTransaction if another commit happened since begin.
  CommitOutcome commit(const Transaction& txn);

  // Trusted path, exempt from the level rules: applies the changes, then
  // checks security at top and restores if needed.
  TrustedOutcome apply_trusted(const std::vector<Change>& changes);

 private:
  TrustedOutcome settle(Database db);
  void install(Database db);

  mutable std::mutex snapshot_mutex_;
  std::mutex writer_mutex_;
  std::shared_ptr<const Database> current_;
  std::uint64_t version_ = 0;
  RestoreConfig cfg_;
  AdminRegistry admin_;
};

}  // namespace coverstore
