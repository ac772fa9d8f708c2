#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "coverstore/lattice.hpp"

namespace coverstore {

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

// A symbol or an integer. Integers order before symbols; a symbol never
// equals an integer.
struct Constant {
  std::variant<std::int64_t, std::string> value;

  static Constant symbol(std::string s) { return Constant{std::move(s)}; }
  static Constant integer(std::int64_t v) { return Constant{v}; }
  bool is_symbol() const { return std::holds_alternative<std::string>(value); }

  friend auto operator<=>(const Constant&, const Constant&) = default;
  friend bool operator==(const Constant&, const Constant&) = default;
};

// Ground atom.
struct Atom {
  std::string predicate;
  std::vector<Constant> args;

  friend auto operator<=>(const Atom&, const Atom&) = default;
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Variable {
  std::string name;

  friend auto operator<=>(const Variable&, const Variable&) = default;
  friend bool operator==(const Variable&, const Variable&) = default;
};

using Term = std::variant<Variable, Constant>;

struct AtomPattern {
  std::string predicate;
  std::vector<Term> args;

  friend auto operator<=>(const AtomPattern&, const AtomPattern&) = default;
  friend bool operator==(const AtomPattern&, const AtomPattern&) = default;
};

struct Equality {
  Term lhs;
  Term rhs;

  friend auto operator<=>(const Equality&, const Equality&) = default;
  friend bool operator==(const Equality&, const Equality&) = default;
};

struct ExistsBlock {
  std::vector<std::string> vars;
  std::vector<AtomPattern> atoms;

  friend auto operator<=>(const ExistsBlock&, const ExistsBlock&) = default;
  friend bool operator==(const ExistsBlock&, const ExistsBlock&) = default;
};

using HeadDisjunct = std::variant<Equality, AtomPattern, ExistsBlock>;

// forall universals: body_1 & ... & body_n -> head_1 | ... | head_k
//
// Constraints are range-restricted: every universal variable occurs in the
// body, so a body match fixes the whole binding.
struct Formula {
  std::vector<std::string> universals;
  std::vector<AtomPattern> body;
  std::vector<HeadDisjunct> head;

  friend auto operator<=>(const Formula&, const Formula&) = default;
  friend bool operator==(const Formula&, const Formula&) = default;
};

// Throws kMalformed (empty body/head, duplicate binder) or kUnboundVariable
// (free variable, or universal variable missing from the body).
void validate(const Formula& f);

// Alpha-normal form: variables renamed in order of first occurrence (body,
// then head) to x, y, z, u, v, w, x1, ...; unused binders dropped. Two
// formulas are equal up to variable renaming iff their canonical forms are
// equal.
Formula canonical(const Formula& f);

// A fact or a constraint: the things that get classified.
using Payload = std::variant<Atom, Formula>;

// ---------------------------------------------------------------------------
// Classified data
// ---------------------------------------------------------------------------

struct ClassifiedFact {
  Atom atom;
  SecurityLevel level;

  friend auto operator<=>(const ClassifiedFact&, const ClassifiedFact&) = default;
  friend bool operator==(const ClassifiedFact&, const ClassifiedFact&) = default;
};

struct ClassifiedConstraint {
  Formula formula;
  SecurityLevel level;

  friend auto operator<=>(const ClassifiedConstraint&, const ClassifiedConstraint&) = default;
  friend bool operator==(const ClassifiedConstraint&, const ClassifiedConstraint&) = default;
};

struct FactTarget {
  Atom atom;
  friend auto operator<=>(const FactTarget&, const FactTarget&) = default;
  friend bool operator==(const FactTarget&, const FactTarget&) = default;
};

struct ConstraintTarget {
  Formula formula;
  friend auto operator<=>(const ConstraintTarget&, const ConstraintTarget&) = default;
  friend bool operator==(const ConstraintTarget&, const ConstraintTarget&) = default;
};

// "The value of predicate(key_args...) at source_level": designates whatever
// value currently sits at value_position, so it survives value updates.
struct PointerTarget {
  std::string predicate;
  std::vector<Constant> key_args;  // every position except value_position
  std::size_t value_position = 0;
  SecurityLevel source_level;

  std::size_t arity() const { return key_args.size() + 1; }
  // Predicate and key match (the level check is the caller's business).
  bool matches(const Atom& a) const;

  friend auto operator<=>(const PointerTarget&, const PointerTarget&) = default;
  friend bool operator==(const PointerTarget&, const PointerTarget&) = default;
};

using CoverTarget = std::variant<FactTarget, ConstraintTarget, PointerTarget>;

// [p]^CS_level. The trigger flag marks a cover story that follows updates of
// the protected fact.
struct CoverStoryDecl {
  CoverTarget target;
  SecurityLevel level;
  bool trigger = false;

  bool is_constraint_cover() const { return std::holds_alternative<ConstraintTarget>(target); }
  friend bool operator==(const CoverStoryDecl&, const CoverStoryDecl&) = default;
};

// Identity of a cover declaration: (target, level). The trigger flag is an
// attribute, not part of the key.
struct CoverOrder {
  bool operator()(const CoverStoryDecl& a, const CoverStoryDecl& b) const {
    if (auto c = a.target <=> b.target; c != 0) return c < 0;
    return a.level < b.level;
  }
};

// Any one member of a database.
using Entry = std::variant<ClassifiedFact, ClassifiedConstraint, CoverStoryDecl>;

// ---------------------------------------------------------------------------
// Database = F u IC u CS^F u CS^IC
// ---------------------------------------------------------------------------

class Database {
 public:
  using FactSet = std::set<ClassifiedFact>;
  using ConstraintSet = std::set<ClassifiedConstraint>;
  using CoverSet = std::set<CoverStoryDecl, CoverOrder>;

  explicit Database(Lattice lattice);
  explicit Database(std::shared_ptr<const Lattice> lattice);

  const Lattice& lattice() const { return *lattice_; }
  const std::shared_ptr<const Lattice>& lattice_ptr() const { return lattice_; }

  const FactSet& facts() const { return facts_; }
  const ConstraintSet& constraints() const { return constraints_; }
  // CS^F: fact and pointer targets.
  const CoverSet& cover_facts() const { return cover_facts_; }
  // CS^IC: constraint targets.
  const CoverSet& cover_constraints() const { return cover_constraints_; }

  bool empty() const {
    return facts_.empty() && constraints_.empty() && cover_facts_.empty() && cover_constraints_.empty();
  }

  // Arity of a predicate as used anywhere in the database.
  std::optional<std::size_t> arity(const std::string& predicate) const;

  // Sub-database of the entries whose level satisfies `keep`. Used for level
  // views; the result needs no re-validation.
  Database filter(const std::function<bool(const SecurityLevel&)>& keep) const;

  friend bool operator==(const Database& a, const Database& b);

 private:
  friend class Mutator;

  std::shared_ptr<const Lattice> lattice_;
  FactSet facts_;
  ConstraintSet constraints_;
  CoverSet cover_facts_;
  CoverSet cover_constraints_;
};

// ---------------------------------------------------------------------------
// Changes
// ---------------------------------------------------------------------------

struct InsertFact { ClassifiedFact fact; };
struct DeleteFact { ClassifiedFact fact; };
// Atomic replacement of one fact by another at the same level.
struct UpdateFact { ClassifiedFact from; Atom to; };
struct InsertConstraint { ClassifiedConstraint constraint; };
struct DeleteConstraint { ClassifiedConstraint constraint; };
struct InsertCover { CoverStoryDecl decl; };
struct DeleteCover { CoverStoryDecl decl; };

using Change = std::variant<InsertFact, DeleteFact, UpdateFact, InsertConstraint, DeleteConstraint,
                            InsertCover, DeleteCover>;

// Returns the changed database. Throws kDuplicateEntry, kNotFound,
// kArityMismatch, kUnknownLevel, kMalformed or kUnboundVariable.
Database apply_change(const Database& db, const Change& change);
void apply_change_in_place(Database& db, const Change& change);

// The change undoing `change` (applied right after it).
Change inverse(const Change& change);

// Level every item of the change is written at.
SecurityLevel change_level(const Change& change);

// Constants occurring in facts and in constraint formulas.
std::set<Constant> active_domain(const Database& db);

// ---------------------------------------------------------------------------
// Text rendering (the same surface syntax the file format uses)
// ---------------------------------------------------------------------------

std::string to_string(const Constant& c);
std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const AtomPattern& a);
std::string to_string(const Formula& f);
std::string to_string(const Payload& p);
std::string to_string(const ClassifiedFact& f);
std::string to_string(const ClassifiedConstraint& c);
// Payload part of a cover target, e.g. "Salary(Dupont, @C1)" for pointers.
std::string target_text(const CoverTarget& t);
std::string to_string(const CoverStoryDecl& d);
std::string to_string(const Entry& e);
std::string to_string(const Change& c);

}  // namespace coverstore
