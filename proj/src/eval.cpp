#include "coverstore/eval.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "coverstore/error.hpp"

namespace coverstore {

namespace {

using Env = std::map<std::string, Constant>;

class Matcher {
 public:
  explicit Matcher(const AtomSet& facts) {
    for (const auto& a : facts) by_predicate_[a.predicate].push_back(&a);
  }

  void check_arity(const AtomPattern& p) const {
    auto it = by_predicate_.find(p.predicate);
    if (it == by_predicate_.end()) return;
    const std::size_t n = it->second.front()->args.size();
    if (n != p.args.size()) {
      throw Error(ErrorCode::kArityMismatch, "predicate '" + p.predicate + "' has arity " + std::to_string(n) +
                                                 " in the facts but " + std::to_string(p.args.size()) +
                                                 " in the constraint");
    }
  }

  bool contains(const Atom& a) const {
    auto it = by_predicate_.find(a.predicate);
    if (it == by_predicate_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](const Atom* f) { return *f == a; });
  }

  // Calls fn(env, matched) for every extension of env matching all patterns.
  // fn returns false to stop the search; join returns false if stopped.
  template <typename Fn>
  bool join(const std::vector<AtomPattern>& patterns, std::size_t i, Env& env, std::vector<const Atom*>& matched,
            Fn&& fn) const {
    if (i == patterns.size()) return fn(env, matched);
    const AtomPattern& p = patterns[i];
    auto it = by_predicate_.find(p.predicate);
    if (it == by_predicate_.end()) return true;
    for (const Atom* fact : it->second) {
      std::vector<std::string> bound_here;
      if (unify(p, *fact, env, bound_here)) {
        matched.push_back(fact);
        const bool go_on = join(patterns, i + 1, env, matched, fn);
        matched.pop_back();
        for (const auto& v : bound_here) env.erase(v);
        if (!go_on) return false;
      } else {
        for (const auto& v : bound_here) env.erase(v);
      }
    }
    return true;
  }

 private:
  static bool unify(const AtomPattern& p, const Atom& fact, Env& env, std::vector<std::string>& bound_here) {
    if (p.args.size() != fact.args.size()) return false;
    for (std::size_t k = 0; k < p.args.size(); ++k) {
      if (const auto* c = std::get_if<Constant>(&p.args[k])) {
        if (*c != fact.args[k]) return false;
        continue;
      }
      const std::string& name = std::get<Variable>(p.args[k]).name;
      auto [it, inserted] = env.emplace(name, fact.args[k]);
      if (inserted) {
        bound_here.push_back(name);
      } else if (it->second != fact.args[k]) {
        return false;
      }
    }
    return true;
  }

  std::map<std::string, std::vector<const Atom*>> by_predicate_;
};

Constant value_of(const Term& t, const Env& env) {
  if (const auto* c = std::get_if<Constant>(&t)) return *c;
  return env.at(std::get<Variable>(t).name);
}

Atom ground(const AtomPattern& p, const Env& env) {
  Atom a{p.predicate, {}};
  for (const auto& t : p.args) a.args.push_back(value_of(t, env));
  return a;
}

bool head_holds(const Matcher& m, const Formula& f, const Env& env) {
  for (const auto& d : f.head) {
    if (const auto* eq = std::get_if<Equality>(&d)) {
      if (value_of(eq->lhs, env) == value_of(eq->rhs, env)) return true;
    } else if (const auto* atom = std::get_if<AtomPattern>(&d)) {
      if (m.contains(ground(*atom, env))) return true;
    } else {
      const auto& block = std::get<ExistsBlock>(d);
      // Existential variables shadow universals of the same name.
      Env inner = env;
      for (const auto& v : block.vars) inner.erase(v);
      std::vector<const Atom*> matched;
      bool found = false;
      m.join(block.atoms, 0, inner, matched, [&](const Env&, const std::vector<const Atom*>&) {
        found = true;
        return false;
      });
      if (found) return true;
    }
  }
  return false;
}

template <typename Fn>
void for_each_violation(const AtomSet& facts, const Formula& f, Fn&& fn) {
  Matcher m(facts);
  for (const auto& p : f.body) m.check_arity(p);
  for (const auto& d : f.head) {
    if (const auto* a = std::get_if<AtomPattern>(&d)) m.check_arity(*a);
    if (const auto* b = std::get_if<ExistsBlock>(&d))
      for (const auto& a : b->atoms) m.check_arity(a);
  }
  Env env;
  std::vector<const Atom*> matched;
  m.join(f.body, 0, env, matched, [&](const Env& e, const std::vector<const Atom*>& body) {
    if (head_holds(m, f, e)) return true;
    return fn(e, body);
  });
}

}  // namespace

std::string to_string(const Binding& b) {
  std::string out;
  for (const auto& [name, value] : b) {
    if (!out.empty()) out += ", ";
    out += name + "=" + to_string(value);
  }
  return out;
}

std::string to_string(const Violation& v) {
  std::string out = to_string(v.constraint) + " | " + to_string(v.binding) + " | ";
  bool first = true;
  for (const auto& a : v.witness_facts) {
    if (!first) out += ", ";
    first = false;
    out += to_string(a);
  }
  return out;
}

bool satisfies(const AtomSet& facts, const Formula& f) {
  bool ok = true;
  for_each_violation(facts, f, [&](const Env&, const std::vector<const Atom*>&) {
    ok = false;
    return false;
  });
  return ok;
}

std::vector<Violation> violations(const AtomSet& facts, const Formula& f) {
  std::map<AtomSet, std::pair<std::string, Binding>> by_witness;
  for_each_violation(facts, f, [&](const Env& env, const std::vector<const Atom*>& body) {
    Binding b;
    for (const auto& u : f.universals) b.emplace_back(u, env.at(u));
    AtomSet witness;
    for (const Atom* a : body) witness.insert(*a);
    std::string text = to_string(b);
    auto it = by_witness.find(witness);
    if (it == by_witness.end()) {
      by_witness.emplace(std::move(witness), std::make_pair(std::move(text), std::move(b)));
    } else if (text < it->second.first) {
      it->second = {std::move(text), std::move(b)};
    }
    return true;
  });

  std::vector<std::pair<std::string, Violation>> keyed;
  for (auto& [witness, entry] : by_witness) {
    keyed.emplace_back(entry.first, Violation{f, std::move(entry.second), witness});
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second.witness_facts < b.second.witness_facts;
  });
  std::vector<Violation> out;
  for (auto& [text, v] : keyed) out.push_back(std::move(v));
  return out;
}

}  // namespace coverstore
