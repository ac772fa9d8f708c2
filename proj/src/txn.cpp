#include "coverstore/txn.hpp"

#include <algorithm>

#include "coverstore/error.hpp"

namespace coverstore {

namespace {

bool mentions(const Formula& f, const std::string& predicate) {
  auto in = [&](const std::vector<AtomPattern>& atoms) {
    return std::any_of(atoms.begin(), atoms.end(), [&](const AtomPattern& a) { return a.predicate == predicate; });
  };
  if (in(f.body)) return true;
  return std::any_of(f.head.begin(), f.head.end(), [&](const HeadDisjunct& d) {
    if (const auto* a = std::get_if<AtomPattern>(&d)) return a->predicate == predicate;
    if (const auto* b = std::get_if<ExistsBlock>(&d)) return in(b->atoms);
    return false;
  });
}

// Update triggers: a trigger-flagged cover story strictly above an updated
// fact moves to the new value. The old declaration goes only once it protects
// nothing any more.
std::vector<CoverStoryDecl> fire_triggers(Database& db, const std::vector<Change>& changes) {
  const Lattice& lat = db.lattice();
  std::vector<CoverStoryDecl> inserted;
  for (const auto& change : changes) {
    const auto* u = std::get_if<UpdateFact>(&change);
    if (!u || u->to == u->from.atom) continue;
    std::vector<CoverStoryDecl> hits;
    for (const auto& d : db.cover_facts()) {
      const auto* t = std::get_if<FactTarget>(&d.target);
      if (t && d.trigger && t->atom == u->from.atom && lat.strictly_dominates(d.level, u->from.level)) {
        hits.push_back(d);
      }
    }
    for (const auto& old : hits) {
      CoverStoryDecl moved{FactTarget{u->to}, old.level, true};
      if (!db.cover_facts().contains(moved)) {
        apply_change_in_place(db, InsertCover{moved});
        inserted.push_back(moved);
      }
      const bool still_protects = std::any_of(db.facts().begin(), db.facts().end(), [&](const ClassifiedFact& f) {
        return f.atom == u->from.atom && lat.strictly_dominates(old.level, f.level);
      });
      if (!still_protects) apply_change_in_place(db, DeleteCover{old});
    }
  }
  return inserted;
}

}  // namespace

ReadResult txn_read(const Transaction& txn, const AtomQuery& pattern) {
  const Database view = view_at(txn.working(), txn.level());
  ReadResult r;
  for (const auto& f : view.facts())
    if (pattern.matches(f.atom)) r.facts.push_back(f);
  for (const auto& c : view.constraints())
    if (mentions(c.formula, pattern.predicate)) r.constraints.push_back(c);
  for (const auto& d : view.cover_facts())
    if (pattern.matches(d.target)) r.covers.push_back(d);
  return r;
}

void txn_write(Transaction& txn, const Change& change) {
  const SecurityLevel written = change_level(change);
  if (written != txn.level_) {
    throw Error(ErrorCode::kWrongLevelWrite, "a transaction at " + txn.level_.name + " cannot write at " +
                                                 written.name + ": " + to_string(change));
  }
  txn.working_ = apply_change(txn.working_, change);
  txn.changes_.push_back(change);
}

Store::Store(Database db, RestoreConfig cfg, bool deterministic)
    : current_(std::make_shared<const Database>(std::move(db))), cfg_(std::move(cfg)), admin_(deterministic) {
  if (cfg_.max_iterations < 1) throw Error(ErrorCode::kInvalidConfig, "max_iterations must be at least 1");
}

std::shared_ptr<const Database> Store::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

std::uint64_t Store::version() const {
  std::lock_guard lock(snapshot_mutex_);
  return version_;
}

void Store::install(Database db) {
  auto next = std::make_shared<const Database>(std::move(db));
  std::lock_guard lock(snapshot_mutex_);
  current_ = std::move(next);
  ++version_;
}

Transaction Store::begin(const SecurityLevel& level, const SecurityLevel& clearance) const {
  std::shared_ptr<const Database> base;
  std::uint64_t version = 0;
  {
    std::lock_guard lock(snapshot_mutex_);
    base = current_;
    version = version_;
  }
  const Lattice& lat = base->lattice();
  lat.require(level);
  lat.require(clearance);
  if (!lat.dominates(clearance, level)) {
    throw Error(ErrorCode::kClearanceTooLow,
                "clearance " + clearance.name + " does not dominate transaction level " + level.name);
  }
  return Transaction(level, std::move(base), version);
}

CommitOutcome Store::commit(const Transaction& txn) {
  std::lock_guard writer(writer_mutex_);
  if (txn.version_ != version()) {
    throw Error(ErrorCode::kStaleTransaction, "the database changed since the transaction began");
  }
  SecurityReport gate = is_secure(txn.working_, txn.level_);
  if (!gate.secure) return Rejected{std::move(gate)};

  Database candidate = txn.working_;
  std::vector<CoverStoryDecl> triggered = fire_triggers(candidate, txn.changes_);
  for (const auto& d : triggered) admin_.audit("TRIGGER insert " + to_string(d));
  install(candidate);

  Committed out{candidate, true, std::nullopt, {}, std::nullopt};
  out.trigger_inserts = std::move(triggered);
  const SecurityReport global = is_secure(candidate, candidate.lattice().top());
  out.global_secure = global.secure;
  if (global.secure) {
    admin_.record_secure();
    out.db = std::move(candidate);
    return out;
  }
  out.alert_id = admin_.raise_alert(Alert::Kind::kPostCommitInsecure,
                                    "commit at " + txn.level_.name + ": " + summarize(global))
                     .id;
  TrustedOutcome settled = settle(std::move(candidate));
  out.db = std::move(settled.db);
  out.restore = std::move(settled.restore);
  return out;
}

TrustedOutcome Store::apply_trusted(const std::vector<Change>& changes) {
  std::lock_guard writer(writer_mutex_);
  Database db = *snapshot();
  for (const auto& c : changes) apply_change_in_place(db, c);
  for (const auto& c : changes) admin_.audit("TRUSTED " + to_string(c));
  install(db);
  const SecurityReport global = is_secure(db, db.lattice().top());
  if (global.secure) {
    admin_.record_secure();
    return TrustedOutcome{std::move(db), true, std::nullopt};
  }
  TrustedOutcome out = settle(std::move(db));
  out.global_secure = false;
  return out;
}

// The database is installed and known to be insecure: restore it.
TrustedOutcome Store::settle(Database db) {
  RestoreResult r = restore(db, cfg_);
  install(r.db);
  admin_.record_restore(r.outcome);
  if (r.outcome.status == RestoreOutcome::Status::kSecured) admin_.record_secure();
  return TrustedOutcome{std::move(r.db), false, std::move(r.outcome)};
}

}  // namespace coverstore
