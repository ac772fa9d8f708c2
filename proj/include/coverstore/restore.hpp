#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "coverstore/guard.hpp"
#include "coverstore/model.hpp"

namespace coverstore {

struct MusMember {
  Payload payload;
  LevelSet levels;  // every classification level of the payload in the view

  bool is_fact() const { return std::holds_alternative<Atom>(payload); }
  friend bool operator==(const MusMember&, const MusMember&) = default;
};

// Witness facts (sorted) followed by the single violated constraint.
struct MinimalInconsistentSet {
  std::vector<MusMember> members;
  friend bool operator==(const MinimalInconsistentSet&, const MinimalInconsistentSet&) = default;
};

std::string to_string(const MinimalInconsistentSet& m);

// Every minimal inconsistent subset of the given classified real world. A set
// is inconsistent when one of its constraints has a body instantiation inside
// the set's facts whose head fails in the whole real world (facts absent from
// the world are false, as under completion). Sets are ordered by constraint,
// then by witness facts.
std::vector<MinimalInconsistentSet> find_mus(const std::map<Atom, LevelSet>& real_facts,
                                             const std::map<Formula, LevelSet>& real_constraints);

// [p_1]^CS_l v ... v [p_k]^CS_l
struct CoverDisjunction {
  SecurityLevel level;
  std::vector<CoverStoryDecl> disjuncts;

  friend bool operator==(const CoverDisjunction&, const CoverDisjunction&) = default;
};

// "cover fact [S] Salary(Dupont, 1600) OR cover fact [S] Salary(Dupont, 2000)",
// or "(no candidate)".
std::string to_string(const CoverDisjunction& d);

// Candidates at the lub of all member levels, minus those classified at the
// lub (theorem (5)), minus constraint candidates when a fact candidate
// remains. Throws kEmptyDisjunction when nothing is left.
CoverDisjunction cs_rule(const MinimalInconsistentSet& mus, const Lattice& lat);

struct RestoreConfig {
  enum class Policy { kPending, kNonDeterministic, kLevelPriority };

  Policy policy = Policy::kPending;
  std::uint64_t seed = 0;
  // Per predicate, levels from highest to lowest priority. The value held at
  // a higher-priority level is taken as real; the lowest-ranked disjunct
  // becomes the cover story.
  std::map<std::string, std::vector<SecurityLevel>> priority;
  int max_iterations = 16;
};

struct Auto {
  CoverStoryDecl decl;
};
struct Defer {};
using Resolution = std::variant<Auto, Defer>;

// `source_levels[i]` are the classification levels of disjunct i's payload
// (needed by the priority policy).
Resolution resolve(const CoverDisjunction& disj, const std::vector<LevelSet>& source_levels,
                   const RestoreConfig& cfg);

struct RestoreAction {
  enum class Kind { kDeleteClassified, kDeleteCoverDecl, kInsertCoverDecl };
  enum class Reason { kStep1, kStep2, kCsRule, kPolicy };

  Kind kind;
  Reason reason;
  Entry item;

  friend bool operator==(const RestoreAction&, const RestoreAction&) = default;
};

// "Step2 delete cover fact [S] Salary(Dupont, 1500)"
std::string to_string(const RestoreAction& a);

struct RestoreOutcome {
  enum class Status { kSecured, kPending };

  std::vector<RestoreAction> actions;
  Status status = Status::kSecured;
  std::vector<CoverDisjunction> pending;  // includes zero-option entries
  bool iteration_cap = false;
};

struct RestoreResult {
  Database db;
  RestoreOutcome outcome;
};

// Steps 1 and 2 of the restoration algorithm, each applied to fixpoint.
RestoreResult step1_downgrade(const Database& db);
RestoreResult step2_prune(const Database& db);

// The full loop: steps 1-2, then a bottom-up sweep over levels applying the
// cs-rule to each minimal inconsistent set of each view. Automatic decisions
// restart the loop; deferred ones accumulate as pending.
RestoreResult restore(const Database& db, const RestoreConfig& cfg);

}  // namespace coverstore
