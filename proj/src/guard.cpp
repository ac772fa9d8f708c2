#include "coverstore/guard.hpp"

#include <algorithm>

namespace coverstore {

RealWorld ClassifiedRealWorld::unclassified() const {
  RealWorld out;
  for (const auto& [a, levels] : facts) out.facts.insert(a);
  for (const auto& [f, levels] : constraints) out.constraints.insert(f);
  return out;
}

const ConsistencyReport* SecurityReport::at(const SecurityLevel& l) const {
  for (const auto& [level, report] : per_level)
    if (level == l) return &report;
  return nullptr;
}

Database view_at(const Database& db, const SecurityLevel& l) {
  const Lattice& lat = db.lattice();
  lat.require(l);
  return db.filter([&](const SecurityLevel& x) { return lat.dominates(l, x); });
}

bool is_covered(const Database& db, const ClassifiedFact& f) {
  const Lattice& lat = db.lattice();
  return std::any_of(db.cover_facts().begin(), db.cover_facts().end(), [&](const CoverStoryDecl& d) {
    if (!lat.strictly_dominates(d.level, f.level)) return false;
    if (const auto* t = std::get_if<FactTarget>(&d.target)) return t->atom == f.atom;
    const auto& p = std::get<PointerTarget>(d.target);
    return p.source_level == f.level && p.matches(f.atom);
  });
}

bool is_covered(const Database& db, const ClassifiedConstraint& c) {
  const Lattice& lat = db.lattice();
  return std::any_of(db.cover_constraints().begin(), db.cover_constraints().end(), [&](const CoverStoryDecl& d) {
    return lat.strictly_dominates(d.level, c.level) && std::get<ConstraintTarget>(d.target).formula == c.formula;
  });
}

ClassifiedRealWorld classified_real_world(const Database& db) {
  ClassifiedRealWorld out;
  std::set<Atom> real_atoms;
  for (const auto& f : db.facts())
    if (!is_covered(db, f)) real_atoms.insert(f.atom);
  for (const auto& f : db.facts())
    if (real_atoms.contains(f.atom)) out.facts[f.atom].insert(f.level);

  std::set<Formula> real_formulas;
  for (const auto& c : db.constraints())
    if (!is_covered(db, c)) real_formulas.insert(c.formula);
  for (const auto& c : db.constraints())
    if (real_formulas.contains(c.formula)) out.constraints[c.formula].insert(c.level);
  return out;
}

RealWorld real_world(const Database& db) { return classified_real_world(db).unclassified(); }

namespace {

template <typename Set, typename PayloadOf>
void axiom3_pairs(const Lattice& lat, const Set& entries, PayloadOf payload_of, std::vector<Axiom3Violation>& out) {
  // Entries are ordered by payload first, so classifications of one payload
  // are adjacent.
  for (auto it = entries.begin(); it != entries.end();) {
    auto end = std::find_if(it, entries.end(), [&](const auto& e) { return payload_of(e) != payload_of(*it); });
    for (auto a = it; a != end; ++a)
      for (auto b = it; b != end; ++b)
        if (lat.strictly_dominates(b->level, a->level)) {
          out.push_back({Payload{payload_of(*a)}, a->level, b->level});
        }
    it = end;
  }
}

}  // namespace

std::vector<Axiom3Violation> check_axiom3(const Database& db) {
  std::vector<Axiom3Violation> out;
  axiom3_pairs(db.lattice(), db.facts(), [](const ClassifiedFact& f) -> const Atom& { return f.atom; }, out);
  axiom3_pairs(db.lattice(), db.constraints(),
               [](const ClassifiedConstraint& c) -> const Formula& { return c.formula; }, out);
  return out;
}

std::vector<CoverStoryDecl> check_axiom4(const Database& db) {
  const Lattice& lat = db.lattice();
  std::vector<CoverStoryDecl> out;
  for (const auto& d : db.cover_facts()) {
    bool protects = false;
    if (const auto* t = std::get_if<FactTarget>(&d.target)) {
      protects = std::any_of(db.facts().begin(), db.facts().end(), [&](const ClassifiedFact& f) {
        return f.atom == t->atom && lat.strictly_dominates(d.level, f.level);
      });
    } else {
      const auto& p = std::get<PointerTarget>(d.target);
      protects = lat.strictly_dominates(d.level, p.source_level) &&
                 std::any_of(db.facts().begin(), db.facts().end(), [&](const ClassifiedFact& f) {
                   return f.level == p.source_level && p.matches(f.atom);
                 });
    }
    if (!protects) out.push_back(d);
  }
  for (const auto& d : db.cover_constraints()) {
    const Formula& formula = std::get<ConstraintTarget>(d.target).formula;
    bool protects = std::any_of(db.constraints().begin(), db.constraints().end(), [&](const ClassifiedConstraint& c) {
      return c.formula == formula && lat.strictly_dominates(d.level, c.level);
    });
    if (!protects) out.push_back(d);
  }
  return out;
}

ConsistencyReport is_consistent(const Database& db) {
  ConsistencyReport r;
  r.axiom3_violations = check_axiom3(db);
  r.axiom4_violations = check_axiom4(db);
  const RealWorld world = real_world(db);
  for (const auto& f : world.constraints) {
    auto v = violations(world.facts, f);
    r.constraint_violations.insert(r.constraint_violations.end(), v.begin(), v.end());
  }
  return r;
}

SecurityReport is_secure(const Database& db, const SecurityLevel& l) {
  const Lattice& lat = db.lattice();
  lat.require(l);
  SecurityReport r{l, {}, true};
  for (const auto& lower : lat.levels()) {
    if (!lat.dominates(l, lower)) continue;
    ConsistencyReport c = is_consistent(view_at(db, lower));
    if (!c.consistent()) r.secure = false;
    r.per_level.emplace_back(lower, std::move(c));
  }
  return r;
}

namespace {

std::string witness_text(const AtomSet& atoms) {
  std::string out;
  for (const auto& a : atoms) {
    if (!out.empty()) out += ", ";
    out += to_string(a);
  }
  return out;
}

template <typename Fn>
void for_each_finding(const std::string& level, const ConsistencyReport& c, Fn&& emit) {
  for (const auto& v : c.axiom3_violations) {
    emit("AXIOM3 " + level + " " + to_string(v.payload) + " | " + v.lower.name + " < " + v.higher.name);
  }
  for (const auto& d : c.axiom4_violations) emit("AXIOM4 " + level + " " + to_string(d));
  for (const auto& v : c.constraint_violations) emit("VIOLATION " + level + " " + to_string(v));
}

}  // namespace

std::string render_machine(const SecurityReport& r) {
  std::string out;
  for (const auto& [level, c] : r.per_level) {
    out += "LEVEL " + level.name + (c.consistent() ? " consistent\n" : " inconsistent\n");
    for_each_finding(level.name, c, [&](const std::string& line) { out += line + "\n"; });
  }
  out += r.secure ? "SECURE yes\n" : "SECURE no\n";
  return out;
}

std::string render_human(const SecurityReport& r) {
  std::string out = "security at " + r.level.name + ": " + (r.secure ? "secure" : "not secure") + "\n";
  for (const auto& [level, c] : r.per_level) {
    out += "  level " + level.name + ": " + (c.consistent() ? "consistent" : "inconsistent") + "\n";
    for (const auto& v : c.axiom3_violations) {
      out += "    " + to_string(v.payload) + " is classified at comparable levels " + v.lower.name + " and " +
             v.higher.name + "\n";
    }
    for (const auto& d : c.axiom4_violations) {
      out += "    " + to_string(d) + " protects nothing classified strictly below " + d.level.name + "\n";
    }
    for (const auto& v : c.constraint_violations) {
      out += "    " + to_string(v.constraint) + " fails for " + to_string(v.binding) + " (witness: " +
             witness_text(v.witness_facts) + ")\n";
    }
  }
  return out;
}

std::string summarize(const SecurityReport& r) {
  std::string out;
  for (const auto& [level, c] : r.per_level) {
    for_each_finding(level.name, c, [&](const std::string& line) {
      if (!out.empty()) out += "; ";
      out += line;
    });
  }
  return out.empty() ? "secure" : out;
}

}  // namespace coverstore
