#pragma once

// Brute-force reference implementations used to check the engine. They share
// the data types but none of the evaluation code.

#include <map>
#include <set>
#include <vector>

#include "coverstore/guard.hpp"
#include "coverstore/model.hpp"
#include "coverstore/restore.hpp"

namespace coverstore::oracle {

// Enumerates every assignment of the universals over the active domain.
bool satisfies(const AtomSet& facts, const Formula& f);

// Body instantiations (as atom sets) of every violating assignment.
std::set<AtomSet> violating_bodies(const AtomSet& facts, const Formula& f);

// Power-set search: every subset of facts and constraints that is
// inconsistent with all strict subsets consistent. Each set is returned as
// (facts, constraints).
struct Subset {
  std::set<Atom> facts;
  std::set<Formula> constraints;
  friend auto operator<=>(const Subset&, const Subset&) = default;
};
std::set<Subset> minimal_inconsistent_sets(const AtomSet& facts, const std::set<Formula>& constraints);

Subset as_subset(const MinimalInconsistentSet& m);

// Consistency of every view at or below the top, recomputed from the
// definitions: real world by formula (6), axioms (3) and (4) pairwise, and
// constraint satisfaction by enumeration.
bool secure_at_top(const Database& db);

}  // namespace coverstore::oracle
