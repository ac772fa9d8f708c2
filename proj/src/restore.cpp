#include "coverstore/restore.hpp"

#include <algorithm>
#include <random>

#include "coverstore/error.hpp"

namespace coverstore {

namespace {

std::string levels_text(const LevelSet& levels) {
  std::string out;
  for (const auto& l : levels) out += (out.empty() ? "" : ",") + l.name;
  return out;
}

// Stable across platforms, unlike std::hash.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool strict_subset(const AtomSet& a, const AtomSet& b) {
  return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::string to_string(const MinimalInconsistentSet& m) {
  std::string out = "{";
  for (std::size_t i = 0; i < m.members.size(); ++i) {
    if (i) out += "; ";
    out += to_string(m.members[i].payload) + " @" + levels_text(m.members[i].levels);
  }
  return out + "}";
}

std::vector<MinimalInconsistentSet> find_mus(const std::map<Atom, LevelSet>& real_facts,
                                             const std::map<Formula, LevelSet>& real_constraints) {
  AtomSet atoms;
  for (const auto& [a, levels] : real_facts) atoms.insert(a);

  std::vector<MinimalInconsistentSet> out;
  for (const auto& [formula, levels] : real_constraints) {
    std::vector<AtomSet> witnesses;
    for (const auto& v : violations(atoms, formula)) witnesses.push_back(v.witness_facts);
    std::sort(witnesses.begin(), witnesses.end());
    for (const auto& w : witnesses) {
      bool minimal = std::none_of(witnesses.begin(), witnesses.end(),
                                  [&](const AtomSet& other) { return strict_subset(other, w); });
      if (!minimal) continue;
      MinimalInconsistentSet mus;
      for (const auto& a : w) mus.members.push_back({Payload{a}, real_facts.at(a)});
      mus.members.push_back({Payload{formula}, levels});
      out.push_back(std::move(mus));
    }
  }
  return out;
}

std::string to_string(const CoverDisjunction& d) {
  if (d.disjuncts.empty()) return "(no candidate)";
  std::string out;
  for (const auto& decl : d.disjuncts) out += (out.empty() ? "" : " OR ") + to_string(decl);
  return out;
}

namespace {

struct Candidates {
  CoverDisjunction disjunction;
  std::vector<LevelSet> source_levels;
};

// cs_rule, keeping each disjunct's source levels. An empty result is returned
// rather than thrown.
Candidates candidates(const MinimalInconsistentSet& mus, const Lattice& lat) {
  std::vector<SecurityLevel> all;
  for (const auto& m : mus.members) all.insert(all.end(), m.levels.begin(), m.levels.end());
  Candidates c;
  c.disjunction.level = lat.lub(all);
  const SecurityLevel& lub = c.disjunction.level;

  std::vector<const MusMember*> kept;
  for (const auto& m : mus.members)
    if (!m.levels.contains(lub)) kept.push_back(&m);
  if (std::any_of(kept.begin(), kept.end(), [](const MusMember* m) { return m->is_fact(); })) {
    std::erase_if(kept, [](const MusMember* m) { return !m->is_fact(); });
  }
  for (const MusMember* m : kept) {
    CoverStoryDecl decl;
    decl.level = lub;
    if (const auto* a = std::get_if<Atom>(&m->payload)) {
      decl.target = FactTarget{*a};
    } else {
      decl.target = ConstraintTarget{std::get<Formula>(m->payload)};
    }
    c.disjunction.disjuncts.push_back(std::move(decl));
    c.source_levels.push_back(m->levels);
  }
  return c;
}

}  // namespace

CoverDisjunction cs_rule(const MinimalInconsistentSet& mus, const Lattice& lat) {
  Candidates c = candidates(mus, lat);
  if (c.disjunction.disjuncts.empty()) {
    throw Error(ErrorCode::kEmptyDisjunction, "every candidate cover story is filtered out for " + to_string(mus));
  }
  return std::move(c.disjunction);
}

Resolution resolve(const CoverDisjunction& disj, const std::vector<LevelSet>& source_levels,
                   const RestoreConfig& cfg) {
  const std::size_t n = disj.disjuncts.size();
  if (n == 0) return Defer{};
  if (n == 1) return Auto{disj.disjuncts.front()};
  switch (cfg.policy) {
    case RestoreConfig::Policy::kPending:
      return Defer{};
    case RestoreConfig::Policy::kNonDeterministic: {
      std::mt19937_64 rng(cfg.seed ^ fnv1a(to_string(disj)));
      return Auto{disj.disjuncts[rng() % n]};
    }
    case RestoreConfig::Policy::kLevelPriority: {
      // Rank = position of the disjunct's best-placed level in its
      // predicate's priority list.
      std::vector<std::size_t> ranks;
      for (std::size_t i = 0; i < n; ++i) {
        const auto* target = std::get_if<FactTarget>(&disj.disjuncts[i].target);
        if (!target) return Defer{};
        auto it = cfg.priority.find(target->atom.predicate);
        if (it == cfg.priority.end()) return Defer{};
        std::optional<std::size_t> rank;
        const auto& order = it->second;
        for (std::size_t r = 0; r < order.size() && !rank; ++r)
          if (i < source_levels.size() && source_levels[i].contains(order[r])) rank = r;
        if (!rank) return Defer{};
        ranks.push_back(*rank);
      }
      const std::size_t worst = *std::max_element(ranks.begin(), ranks.end());
      if (std::count(ranks.begin(), ranks.end(), worst) != 1) return Defer{};
      const auto idx = static_cast<std::size_t>(std::find(ranks.begin(), ranks.end(), worst) - ranks.begin());
      return Auto{disj.disjuncts[idx]};
    }
  }
  return Defer{};
}

std::string to_string(const RestoreAction& a) {
  static constexpr const char* kReasons[] = {"Step1", "Step2", "CsRule", "Policy"};
  const char* verb = a.kind == RestoreAction::Kind::kInsertCoverDecl ? "insert" : "delete";
  return std::string(kReasons[static_cast<int>(a.reason)]) + " " + verb + " " + to_string(a.item);
}

RestoreResult step1_downgrade(const Database& db) {
  const Lattice& lat = db.lattice();
  RestoreResult r{db, {}};
  // Keeping only the minimal classifications of each payload reaches the
  // fixpoint in one pass.
  auto dominates_another = [&](const auto& set, const auto& entry, auto same_payload) {
    return std::any_of(set.begin(), set.end(), [&](const auto& other) {
      return same_payload(other, entry) && lat.strictly_dominates(entry.level, other.level);
    });
  };
  for (const auto& f : db.facts()) {
    if (dominates_another(db.facts(), f, [](const ClassifiedFact& a, const ClassifiedFact& b) {
          return a.atom == b.atom;
        })) {
      apply_change_in_place(r.db, DeleteFact{f});
      r.outcome.actions.push_back({RestoreAction::Kind::kDeleteClassified, RestoreAction::Reason::kStep1, f});
    }
  }
  for (const auto& c : db.constraints()) {
    if (dominates_another(db.constraints(), c, [](const ClassifiedConstraint& a, const ClassifiedConstraint& b) {
          return a.formula == b.formula;
        })) {
      apply_change_in_place(r.db, DeleteConstraint{c});
      r.outcome.actions.push_back({RestoreAction::Kind::kDeleteClassified, RestoreAction::Reason::kStep1, c});
    }
  }
  return r;
}

RestoreResult step2_prune(const Database& db) {
  RestoreResult r{db, {}};
  // Removing a cover declaration never affects what another one protects, so
  // one pass is a fixpoint.
  for (const auto& d : check_axiom4(db)) {
    apply_change_in_place(r.db, DeleteCover{d});
    r.outcome.actions.push_back({RestoreAction::Kind::kDeleteCoverDecl, RestoreAction::Reason::kStep2, d});
  }
  return r;
}

namespace {

bool cover_exists(const Database& db, const CoverStoryDecl& d) {
  const auto& set = d.is_constraint_cover() ? db.cover_constraints() : db.cover_facts();
  return set.contains(d);
}

void add_pending(std::vector<CoverDisjunction>& pending, CoverDisjunction d) {
  if (std::find(pending.begin(), pending.end(), d) == pending.end()) pending.push_back(std::move(d));
}

}  // namespace

RestoreResult restore(const Database& db, const RestoreConfig& cfg) {
  if (cfg.max_iterations < 1) throw Error(ErrorCode::kInvalidConfig, "max_iterations must be at least 1");
  const Lattice& lat = db.lattice();
  RestoreResult r{db, {}};
  auto& actions = r.outcome.actions;

  bool settled = false;
  for (int iteration = 0; iteration < cfg.max_iterations && !settled; ++iteration) {
    for (auto* step : {&step1_downgrade, &step2_prune}) {
      RestoreResult s = step(r.db);
      r.db = std::move(s.db);
      actions.insert(actions.end(), s.outcome.actions.begin(), s.outcome.actions.end());
    }

    r.outcome.pending.clear();
    bool restarted = false;
    for (const auto& level : lat.levels()) {
      const ClassifiedRealWorld world = classified_real_world(view_at(r.db, level));
      for (const auto& mus : find_mus(world.facts, world.constraints)) {
        Candidates c = candidates(mus, lat);
        for (std::size_t i = c.disjunction.disjuncts.size(); i-- > 0;) {
          if (cover_exists(r.db, c.disjunction.disjuncts[i])) {
            c.disjunction.disjuncts.erase(c.disjunction.disjuncts.begin() + static_cast<std::ptrdiff_t>(i));
            c.source_levels.erase(c.source_levels.begin() + static_cast<std::ptrdiff_t>(i));
          }
        }
        Resolution res = resolve(c.disjunction, c.source_levels, cfg);
        if (const auto* chosen = std::get_if<Auto>(&res)) {
          apply_change_in_place(r.db, InsertCover{chosen->decl});
          const auto reason = c.disjunction.disjuncts.size() == 1 ? RestoreAction::Reason::kCsRule
                                                                  : RestoreAction::Reason::kPolicy;
          actions.push_back({RestoreAction::Kind::kInsertCoverDecl, reason, chosen->decl});
          restarted = true;
          break;
        }
        add_pending(r.outcome.pending, std::move(c.disjunction));
      }
      if (restarted) break;
    }
    settled = !restarted;
  }

  r.outcome.iteration_cap = !settled;
  const bool secure = is_secure(r.db, lat.top()).secure;
  r.outcome.status = settled && secure && r.outcome.pending.empty() ? RestoreOutcome::Status::kSecured
                                                                    : RestoreOutcome::Status::kPending;
  return r;
}

}  // namespace coverstore
