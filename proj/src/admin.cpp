#include "coverstore/admin.hpp"

#include <algorithm>
#include <ctime>

#include "coverstore/error.hpp"
#include "coverstore/txn.hpp"

namespace coverstore {

const char* alert_kind_name(Alert::Kind k) {
  switch (k) {
    case Alert::Kind::kPostCommitInsecure:
      return "PostCommitInsecure";
    case Alert::Kind::kEmptyDisjunction:
      return "EmptyDisjunction";
    case Alert::Kind::kIterationCap:
      return "IterationCap";
  }
  return "?";
}

void AdminRegistry::audit(std::string line) {
  if (sink_) sink_(line);
  audit_.push_back(std::move(line));
}

const Alert& AdminRegistry::raise_alert(Alert::Kind kind, std::string detail) {
  Alert a;
  a.id = next_alert_++;
  a.kind = kind;
  a.detail = std::move(detail);
  if (!deterministic_) {
    std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    a.timestamp = buf;
  }
  std::string line = "ALERT " + std::to_string(a.id) + " " + alert_kind_name(kind) + " | " + a.detail;
  if (a.timestamp) line += " | at " + *a.timestamp;
  audit(std::move(line));
  alerts_.push_back(std::move(a));
  return alerts_.back();
}

void AdminRegistry::resolve_alerts() {
  for (auto& a : alerts_) a.resolved = true;
}

std::vector<PendingDisjunction> AdminRegistry::visible_pending(const Lattice& lat,
                                                               const SecurityLevel& clearance) const {
  std::vector<PendingDisjunction> out;
  for (const auto& p : pending_)
    if (p.open && lat.dominates(clearance, p.disjunction.level)) out.push_back(p);
  return out;
}

const PendingDisjunction* AdminRegistry::find_pending(std::uint64_t id) const {
  for (const auto& p : pending_)
    if (p.id == id) return &p;
  return nullptr;
}

void AdminRegistry::close_pending(std::uint64_t id, const std::string& why) {
  for (auto& p : pending_) {
    if (p.id == id && p.open) {
      p.open = false;
      audit("CLOSED " + std::to_string(id) + " | " + why);
    }
  }
}

void AdminRegistry::record_restore(const RestoreOutcome& outcome) {
  for (const auto& a : outcome.actions) audit("ACTION " + to_string(a));

  for (auto& p : pending_) {
    if (p.open && std::find(outcome.pending.begin(), outcome.pending.end(), p.disjunction) == outcome.pending.end()) {
      close_pending(p.id, "superseded");
    }
  }
  for (const auto& d : outcome.pending) {
    bool known = std::any_of(pending_.begin(), pending_.end(),
                             [&](const PendingDisjunction& p) { return p.open && p.disjunction == d; });
    if (known) continue;
    PendingDisjunction p{next_pending_++, d, true};
    audit("PENDING " + std::to_string(p.id) + " " + d.level.name + " | " + to_string(d));
    pending_.push_back(std::move(p));
    if (d.disjuncts.empty()) {
      raise_alert(Alert::Kind::kEmptyDisjunction,
                  "pending " + std::to_string(pending_.back().id) + " at " + d.level.name + " has no candidate");
    }
  }
  if (outcome.iteration_cap) {
    raise_alert(Alert::Kind::kIterationCap, "restoration stopped at the iteration limit");
  }
}

void AdminRegistry::record_secure() {
  for (auto& p : pending_)
    if (p.open) close_pending(p.id, "database secure");
  resolve_alerts();
}

Database sa_resolve(Store& store, std::uint64_t pending_id, const SaChoice& choice) {
  AdminRegistry& admin = store.admin();
  const PendingDisjunction* entry = admin.find_pending(pending_id);
  if (!entry) throw Error(ErrorCode::kUnknownPending, "no pending disjunction " + std::to_string(pending_id));
  if (!entry->open) throw Error(ErrorCode::kAlreadyClosed, "pending disjunction " + std::to_string(pending_id) +
                                                               " is already closed");
  std::vector<Change> changes;
  std::string what;
  if (const auto* index = std::get_if<std::size_t>(&choice)) {
    const auto& disjuncts = entry->disjunction.disjuncts;
    if (*index >= disjuncts.size()) {
      throw Error(ErrorCode::kInvalidChoice, "pending disjunction " + std::to_string(pending_id) + " has " +
                                                 std::to_string(disjuncts.size()) + " option(s)");
    }
    changes.push_back(InsertCover{disjuncts[*index]});
    what = "choose " + to_string(disjuncts[*index]);
  } else {
    changes = std::get<ExternalAction>(choice).changes;
    what = "external action (" + std::to_string(changes.size()) + " change(s))";
  }
  // Validate before touching the registry so a failing choice leaves it open.
  Database probe = *store.snapshot();
  for (const auto& c : changes) apply_change_in_place(probe, c);

  admin.close_pending(pending_id, "SA " + what);
  return store.apply_trusted(changes).db;
}

Database register_trigger(Store& store, const CoverStoryDecl& decl) {
  if (std::holds_alternative<PointerTarget>(decl.target)) {
    throw Error(ErrorCode::kRedundantTrigger, "pointer cover stories already follow updates");
  }
  const auto snapshot = store.snapshot();
  const auto& set = decl.is_constraint_cover() ? snapshot->cover_constraints() : snapshot->cover_facts();
  auto it = set.find(decl);
  if (it == set.end()) throw Error(ErrorCode::kNotFound, "no such cover declaration: " + to_string(decl));
  if (decl.is_constraint_cover()) {
    throw Error(ErrorCode::kMalformed, "triggers apply to fact cover stories only");
  }
  if (it->trigger) return *snapshot;
  CoverStoryDecl flagged = *it;
  flagged.trigger = true;
  return store.apply_trusted({DeleteCover{*it}, InsertCover{flagged}}).db;
}

}  // namespace coverstore
