#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coverstore/model.hpp"

namespace coverstore {

// Database file format:
//
//   lattice { levels: U, C1, C2, S; order: U < C1, U < C2, C1 < S, C2 < S; }
//   constraint [U] forall x, y: Salary(x, y) -> Employee(x);
//   fact [C1] Salary(Dupont, 1500);
//   cover fact [S] trigger Salary(Dupont, 1500);
//   cover pointer [S] Salary(Dupont, @C1);
//   cover constraint [S] forall x, y: Salary(x, y) -> Employee(x);
//
// '#' starts a comment. Constraints without a level are classified at the
// lattice bottom. Inside formulas, identifiers bound by forall/exists are
// variables, other capitalised identifiers and integers are constants, and a
// free lower-case identifier is an unbound variable.

// Throws kSyntaxError or kSemanticError, both with a source span.
Database parse_database(std::string_view text);

// Canonical form: lattice, constraints, facts, cover constraints, cover facts,
// each section sorted. parse_database(serialize(db)) == db.
std::string serialize(const Database& db);

// Throws kSyntaxError or kUnboundVariable. The formula is returned as written
// (not alpha-normalised).
Formula parse_formula(std::string_view text);

Atom parse_atom(std::string_view text);

// Atom with optional wildcard arguments, e.g. "Salary(Dupont, ?)".
struct AtomQuery {
  std::string predicate;
  std::vector<std::optional<Constant>> args;

  bool matches(const Atom& a) const;
  bool matches(const CoverTarget& t) const;
};

AtomQuery parse_query(std::string_view text);

// Parses one classified entry in declaration syntax ("fact [U] P(a)",
// "cover pointer [S] P(a, @C1)", ...). When the "[level]" part is omitted, `default_level` is
// used (or the lattice bottom for constraints). Throws kSyntaxError or
// kSemanticError.
Entry parse_entry(std::string_view text, const Lattice& lattice,
                  std::optional<SecurityLevel> default_level = std::nullopt);

// "insert <entry>", "delete <entry>" or "update fact [L] A -> B" (the
// "fact [L]" part is optional for updates, as is every level when
// `default_level` is given).
Change parse_change(std::string_view text, const Lattice& lattice,
                    std::optional<SecurityLevel> default_level = std::nullopt);

}  // namespace coverstore
