#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coverstore/model.hpp"

namespace coverstore {

using AtomSet = std::set<Atom>;
using Binding = std::vector<std::pair<std::string, Constant>>;  // in universals order

// A body instantiation under which no head disjunct holds.
struct Violation {
  Formula constraint;
  Binding binding;
  AtomSet witness_facts;
};

// "x=Dupont, y=1600"
std::string to_string(const Binding& b);
std::string to_string(const Violation& v);

// Active-domain satisfaction. Throws kArityMismatch when the formula uses a
// predicate with a different arity than the facts do.
bool satisfies(const AtomSet& facts, const Formula& f);

// All violating instantiations, one per distinct witness set (the binding kept
// is the one with the smallest rendering), ordered by binding rendering.
std::vector<Violation> violations(const AtomSet& facts, const Formula& f);

}  // namespace coverstore
