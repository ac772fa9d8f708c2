#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "coverstore/eval.hpp"
#include "coverstore/model.hpp"

namespace coverstore {

using LevelSet = std::set<SecurityLevel>;

// F^Real and IC^Real.
struct RealWorld {
  AtomSet facts;
  std::set<Formula> constraints;
};

// The real world together with every classification level of each real
// payload.
struct ClassifiedRealWorld {
  std::map<Atom, LevelSet> facts;
  std::map<Formula, LevelSet> constraints;

  RealWorld unclassified() const;
};

struct Axiom3Violation {
  Payload payload;
  SecurityLevel lower;
  SecurityLevel higher;

  friend bool operator==(const Axiom3Violation&, const Axiom3Violation&) = default;
};

struct ConsistencyReport {
  std::vector<Axiom3Violation> axiom3_violations;
  std::vector<CoverStoryDecl> axiom4_violations;
  std::vector<Violation> constraint_violations;

  bool consistent() const {
    return axiom3_violations.empty() && axiom4_violations.empty() && constraint_violations.empty();
  }
};

struct SecurityReport {
  SecurityLevel level;
  // Every level dominated by `level`, in bottom-up order.
  std::vector<std::pair<SecurityLevel, ConsistencyReport>> per_level;
  bool secure = true;

  const ConsistencyReport* at(const SecurityLevel& l) const;
};

// DB_l. Throws kUnknownLevel.
Database view_at(const Database& db, const SecurityLevel& l);

// Whether the classification [p]_level survives formula (6) in `db`: no cover
// declaration for p at a level strictly above it.
bool is_covered(const Database& db, const ClassifiedFact& f);
bool is_covered(const Database& db, const ClassifiedConstraint& c);

RealWorld real_world(const Database& db);
ClassifiedRealWorld classified_real_world(const Database& db);

std::vector<Axiom3Violation> check_axiom3(const Database& db);
std::vector<CoverStoryDecl> check_axiom4(const Database& db);

ConsistencyReport is_consistent(const Database& db);

// Throws kUnknownLevel.
SecurityReport is_secure(const Database& db, const SecurityLevel& l);

// One line per finding:
//   LEVEL <l> consistent|inconsistent
//   AXIOM3 <l> <payload> | <lower> < <higher>
//   AXIOM4 <l> <cover decl>
//   VIOLATION <l> <formula> | <binding> | <witness facts>
//   SECURE yes|no
std::string render_machine(const SecurityReport& r);
std::string render_human(const SecurityReport& r);

// Single-line summary of the inconsistent levels, for alert details.
std::string summarize(const SecurityReport& r);

}  // namespace coverstore
