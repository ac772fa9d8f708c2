#pragma once

#include <cstddef>
#include <compare>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace coverstore {

// A classification/clearance level, identified by name within one lattice.
struct SecurityLevel {
  std::string name;

  SecurityLevel() = default;
  explicit SecurityLevel(std::string n) : name(std::move(n)) {}

  friend auto operator<=>(const SecurityLevel&, const SecurityLevel&) = default;
  friend bool operator==(const SecurityLevel&, const SecurityLevel&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const SecurityLevel& l) { return os << l.name; }

// True for names matching [A-Za-z][A-Za-z0-9_]*.
bool is_identifier(std::string_view text);

// Finite lattice of security levels. Dominance, lub and glb are tabulated
// once at construction; queries are lookups. Immutable after construction.
//
// Levels are kept in a canonical bottom-up order (number of strictly lower
// levels, then name), so two lattices built from the same order relation
// compare equal regardless of declaration order.
class Lattice {
 public:
  // Throws kInvalidIdentifier, kDuplicateLevel, kUnknownLevelInOrder,
  // kCycleDetected or kNotALattice.
  static Lattice build(const std::vector<std::string>& levels,
                       const std::vector<std::pair<std::string, std::string>>& order_pairs);

  // a >= b. Throws kUnknownLevel.
  bool dominates(const SecurityLevel& a, const SecurityLevel& b) const;
  bool strictly_dominates(const SecurityLevel& a, const SecurityLevel& b) const;
  bool comparable(const SecurityLevel& a, const SecurityLevel& b) const;

  // Least upper bound of a non-empty set. Throws kUnknownLevel, or
  // kNotALattice for an empty input.
  SecurityLevel lub(std::span<const SecurityLevel> xs) const;
  SecurityLevel glb(std::span<const SecurityLevel> xs) const;

  bool contains(const SecurityLevel& l) const { return index_.contains(l.name); }
  void require(const SecurityLevel& l) const;

  const SecurityLevel& top() const { return levels_.at(top_); }
  const SecurityLevel& bottom() const { return levels_.at(bottom_); }

  // Bottom-up topological order (canonical).
  const std::vector<SecurityLevel>& levels() const { return levels_; }

  // Covering pairs (lower, higher) of the Hasse diagram, canonical order.
  std::vector<std::pair<SecurityLevel, SecurityLevel>> covering_pairs() const;

  std::size_t size() const { return levels_.size(); }

  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.levels_ == b.levels_ && a.geq_ == b.geq_;
  }

 private:
  Lattice() = default;
  std::size_t index_of(const SecurityLevel& l) const;

  std::vector<SecurityLevel> levels_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<bool>> geq_;  // geq_[a][b] <=> a >= b
  std::vector<std::vector<std::size_t>> lub_;
  std::vector<std::vector<std::size_t>> glb_;
  std::size_t top_ = 0;
  std::size_t bottom_ = 0;
};

}  // namespace coverstore
