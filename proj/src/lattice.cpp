#include "coverstore/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <optional>

#include "coverstore/error.hpp"

namespace coverstore {

bool is_identifier(std::string_view text) {
  if (text.empty() || !std::isalpha(static_cast<unsigned char>(text.front()))) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

namespace {

using Matrix = std::vector<std::vector<bool>>;

// Index of the unique least element of `candidates` under `below(a, b)`
// (a is below-or-equal b), or nullopt when there is none.
template <typename Below>
std::optional<std::size_t> least_of(const std::vector<std::size_t>& candidates, Below below) {
  std::optional<std::size_t> found;
  for (std::size_t c : candidates) {
    bool least = std::all_of(candidates.begin(), candidates.end(),
                             [&](std::size_t d) { return below(c, d); });
    if (least) {
      if (found) return std::nullopt;
      found = c;
    }
  }
  return found;
}

}  // namespace

Lattice Lattice::build(const std::vector<std::string>& names,
                       const std::vector<std::pair<std::string, std::string>>& order_pairs) {
  if (names.empty()) throw Error(ErrorCode::kNotALattice, "a lattice needs at least one level");

  std::map<std::string, std::size_t> decl_index;
  for (const auto& n : names) {
    if (!is_identifier(n)) throw Error(ErrorCode::kInvalidIdentifier, "invalid level name '" + n + "'");
    if (!decl_index.emplace(n, decl_index.size()).second) {
      throw Error(ErrorCode::kDuplicateLevel, "level '" + n + "' declared twice");
    }
  }

  const std::size_t n = names.size();
  Matrix geq(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) geq[i][i] = true;
  for (const auto& [lo, hi] : order_pairs) {
    auto lo_it = decl_index.find(lo);
    auto hi_it = decl_index.find(hi);
    if (lo_it == decl_index.end() || hi_it == decl_index.end()) {
      const std::string& bad = lo_it == decl_index.end() ? lo : hi;
      throw Error(ErrorCode::kUnknownLevelInOrder, "order mentions undeclared level '" + bad + "'");
    }
    if (lo_it->second == hi_it->second) {
      throw Error(ErrorCode::kCycleDetected, "level '" + lo + "' ordered strictly below itself");
    }
    geq[hi_it->second][lo_it->second] = true;
  }
  // Reflexive-transitive closure.
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (geq[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (geq[k][j]) geq[i][j] = true;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (geq[i][j] && geq[j][i]) {
        throw Error(ErrorCode::kCycleDetected,
                    "order is cyclic between '" + names[i] + "' and '" + names[j] + "'");
      }

  // Canonical bottom-up order: fewer strictly-lower levels first, then name.
  std::vector<std::size_t> below_count(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && geq[i][j]) ++below_count[i];
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    if (below_count[a] != below_count[b]) return below_count[a] < below_count[b];
    return names[a] < names[b];
  });

  Lattice lat;
  lat.geq_.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    lat.levels_.emplace_back(names[perm[i]]);
    lat.index_.emplace(names[perm[i]], i);
    for (std::size_t j = 0; j < n; ++j) lat.geq_[i][j] = geq[perm[i]][perm[j]];
  }

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  lat.lub_.assign(n, std::vector<std::size_t>(n, 0));
  lat.glb_.assign(n, std::vector<std::size_t>(n, 0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      std::vector<std::size_t> upper, lower;
      for (std::size_t c : all) {
        if (lat.geq_[c][a] && lat.geq_[c][b]) upper.push_back(c);
        if (lat.geq_[a][c] && lat.geq_[b][c]) lower.push_back(c);
      }
      auto lub = least_of(upper, [&](std::size_t x, std::size_t y) { return lat.geq_[y][x]; });
      auto glb = least_of(lower, [&](std::size_t x, std::size_t y) { return lat.geq_[x][y]; });
      if (!lub || !glb) {
        throw Error(ErrorCode::kNotALattice, "levels '" + lat.levels_[a].name + "' and '" +
                                                 lat.levels_[b].name +
                                                 "' lack a unique least upper or greatest lower bound");
      }
      lat.lub_[a][b] = *lub;
      lat.glb_[a][b] = *glb;
    }
  }

  std::size_t top = 0, bottom = 0;
  for (std::size_t i = 1; i < n; ++i) {
    top = lat.lub_[top][i];
    bottom = lat.glb_[bottom][i];
  }
  lat.top_ = top;
  lat.bottom_ = bottom;
  return lat;
}

std::size_t Lattice::index_of(const SecurityLevel& l) const {
  auto it = index_.find(l.name);
  if (it == index_.end()) throw Error(ErrorCode::kUnknownLevel, "unknown level '" + l.name + "'");
  return it->second;
}

void Lattice::require(const SecurityLevel& l) const { (void)index_of(l); }

bool Lattice::dominates(const SecurityLevel& a, const SecurityLevel& b) const {
  return geq_[index_of(a)][index_of(b)];
}

bool Lattice::strictly_dominates(const SecurityLevel& a, const SecurityLevel& b) const {
  return a != b && dominates(a, b);
}

bool Lattice::comparable(const SecurityLevel& a, const SecurityLevel& b) const {
  return dominates(a, b) || dominates(b, a);
}

SecurityLevel Lattice::lub(std::span<const SecurityLevel> xs) const {
  if (xs.empty()) throw Error(ErrorCode::kNotALattice, "lub of an empty set");
  std::size_t acc = index_of(xs.front());
  for (const auto& x : xs.subspan(1)) acc = lub_[acc][index_of(x)];
  return levels_[acc];
}

SecurityLevel Lattice::glb(std::span<const SecurityLevel> xs) const {
  if (xs.empty()) throw Error(ErrorCode::kNotALattice, "glb of an empty set");
  std::size_t acc = index_of(xs.front());
  for (const auto& x : xs.subspan(1)) acc = glb_[acc][index_of(x)];
  return levels_[acc];
}

std::vector<std::pair<SecurityLevel, SecurityLevel>> Lattice::covering_pairs() const {
  std::vector<std::pair<SecurityLevel, SecurityLevel>> out;
  const std::size_t n = levels_.size();
  for (std::size_t lo = 0; lo < n; ++lo) {
    for (std::size_t hi = 0; hi < n; ++hi) {
      if (lo == hi || !geq_[hi][lo]) continue;
      bool covers = true;
      for (std::size_t mid = 0; mid < n && covers; ++mid) {
        if (mid != lo && mid != hi && geq_[hi][mid] && geq_[mid][lo]) covers = false;
      }
      if (covers) out.emplace_back(levels_[lo], levels_[hi]);
    }
  }
  return out;
}

}  // namespace coverstore
