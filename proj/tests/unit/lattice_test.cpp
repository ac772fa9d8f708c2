#include <doctest.h>

#include "coverstore/error.hpp"
#include "coverstore/lattice.hpp"
#include "random_db.hpp"

using namespace coverstore;

namespace {

Lattice diamond() {
  return Lattice::build({"U", "C1", "C2", "S"}, {{"U", "C1"}, {"U", "C2"}, {"C1", "S"}, {"C2", "S"}});
}

ErrorCode code_of(const std::vector<std::string>& levels, const std::vector<std::pair<std::string, std::string>>& order) {
  try {
    Lattice::build(levels, order);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kMalformed;
}

}  // namespace

TEST_CASE("two-level lattice: S dominates U") {
  const Lattice lat = Lattice::build({"U", "S"}, {{"U", "S"}});
  CHECK(lat.dominates(SecurityLevel("S"), SecurityLevel("U")));
  CHECK_FALSE(lat.dominates(SecurityLevel("U"), SecurityLevel("S")));
  CHECK(lat.top() == SecurityLevel("S"));
  CHECK(lat.bottom() == SecurityLevel("U"));
  const SecurityLevel both[] = {SecurityLevel("U"), SecurityLevel("S")};
  CHECK(lat.lub(both) == SecurityLevel("S"));
}

TEST_CASE("diamond: C1 and C2 are incomparable, lub is S") {
  const Lattice lat = diamond();
  CHECK_FALSE(lat.dominates(SecurityLevel("C1"), SecurityLevel("C2")));
  CHECK_FALSE(lat.dominates(SecurityLevel("C2"), SecurityLevel("C1")));
  const SecurityLevel cs[] = {SecurityLevel("C1"), SecurityLevel("C2")};
  CHECK(lat.lub(cs) == SecurityLevel("S"));
  CHECK(lat.glb(cs) == SecurityLevel("U"));
  const SecurityLevel u[] = {SecurityLevel("U")};
  CHECK(lat.lub(u) == SecurityLevel("U"));
  for (const auto& l : lat.levels()) CHECK(lat.dominates(l, l));
}

TEST_CASE("canonical level order is bottom-up and independent of declaration order") {
  const Lattice a = diamond();
  const Lattice b = Lattice::build({"S", "C2", "C1", "U"}, {{"C2", "S"}, {"U", "C2"}, {"C1", "S"}, {"U", "C1"}});
  CHECK(a == b);
  std::vector<std::string> names;
  for (const auto& l : a.levels()) names.push_back(l.name);
  CHECK(names == std::vector<std::string>{"U", "C1", "C2", "S"});
  CHECK(a.covering_pairs().size() == 4);
}

TEST_CASE("dominance is the transitive closure of the order pairs") {
  const Lattice lat = Lattice::build({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
  CHECK(lat.dominates(SecurityLevel("C"), SecurityLevel("A")));
  CHECK(lat.covering_pairs().size() == 2);
}

TEST_CASE("construction errors") {
  CHECK(code_of({"A", "B"}, {{"A", "B"}, {"B", "A"}}) == ErrorCode::kCycleDetected);
  CHECK(code_of({"A"}, {{"A", "A"}}) == ErrorCode::kCycleDetected);
  CHECK(code_of({"A", "A"}, {}) == ErrorCode::kDuplicateLevel);
  CHECK(code_of({"A", "B"}, {{"A", "X"}}) == ErrorCode::kUnknownLevelInOrder);
  CHECK(code_of({"A", "B"}, {}) == ErrorCode::kNotALattice);
  CHECK(code_of({}, {}) == ErrorCode::kNotALattice);
  CHECK(code_of({"1A"}, {}) == ErrorCode::kInvalidIdentifier);
  // Two maximal elements above a common bottom.
  CHECK(code_of({"U", "A", "B"}, {{"U", "A"}, {"U", "B"}}) == ErrorCode::kNotALattice);
  // A and B have two incomparable upper bounds C and D.
  CHECK(code_of({"U", "A", "B", "C", "D", "T"},
                {{"U", "A"}, {"U", "B"}, {"A", "C"}, {"B", "C"}, {"A", "D"}, {"B", "D"}, {"C", "T"}, {"D", "T"}}) ==
        ErrorCode::kNotALattice);
}

TEST_CASE("unknown level queries throw") {
  const Lattice lat = diamond();
  CHECK_THROWS_AS(lat.dominates(SecurityLevel("X"), SecurityLevel("U")), Error);
}

TEST_CASE("lub is the least common upper bound (brute force over random lattices)") {
  testing::Gen g(7);
  for (int round = 0; round < 200; ++round) {
    const Lattice lat = testing::random_lattice(g);
    for (const auto& a : lat.levels()) {
      for (const auto& b : lat.levels()) {
        const SecurityLevel pair[] = {a, b};
        const SecurityLevel j = lat.lub(pair);
        CHECK(lat.dominates(j, a));
        CHECK(lat.dominates(j, b));
        for (const auto& c : lat.levels()) {
          if (c != j && lat.dominates(j, c)) CHECK_FALSE((lat.dominates(c, a) && lat.dominates(c, b)));
        }
      }
    }
    for (const auto& l : lat.levels()) CHECK(lat.dominates(lat.top(), l));
  }
}
