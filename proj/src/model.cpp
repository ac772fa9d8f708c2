#include "coverstore/model.hpp"

#include <algorithm>
#include <map>

#include "coverstore/error.hpp"

namespace coverstore {

bool PointerTarget::matches(const Atom& a) const {
  if (a.predicate != predicate || a.args.size() != arity()) return false;
  std::size_t k = 0;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i == value_position) continue;
    if (a.args[i] != key_args[k++]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Formula validation and alpha-normalisation
// ---------------------------------------------------------------------------

namespace {

template <typename Fn>
void for_each_var(const AtomPattern& a, Fn&& fn) {
  for (const auto& t : a.args)
    if (const auto* v = std::get_if<Variable>(&t)) fn(v->name);
}

void require_bound(const Term& t, const std::set<std::string>& bound, const char* where) {
  if (const auto* v = std::get_if<Variable>(&t); v && !bound.contains(v->name)) {
    throw Error(ErrorCode::kUnboundVariable,
                "variable '" + v->name + "' is not bound in the " + where);
  }
}

}  // namespace

void validate(const Formula& f) {
  if (f.body.empty()) throw Error(ErrorCode::kMalformed, "constraint body is empty");
  if (f.head.empty()) throw Error(ErrorCode::kMalformed, "constraint head is empty");

  std::set<std::string> universals;
  for (const auto& u : f.universals) {
    if (!universals.insert(u).second) {
      throw Error(ErrorCode::kMalformed, "variable '" + u + "' bound twice");
    }
  }

  std::set<std::string> in_body;
  for (const auto& a : f.body) {
    for (const auto& t : a.args) require_bound(t, universals, "constraint body");
    for_each_var(a, [&](const std::string& v) { in_body.insert(v); });
  }

  auto check_head_var = [&](const std::string& v) {
    if (universals.contains(v) && !in_body.contains(v)) {
      throw Error(ErrorCode::kUnboundVariable,
                  "universal variable '" + v + "' does not occur in the constraint body");
    }
  };

  for (const auto& d : f.head) {
    if (const auto* eq = std::get_if<Equality>(&d)) {
      for (const Term* t : {&eq->lhs, &eq->rhs}) {
        require_bound(*t, universals, "constraint head");
        if (const auto* v = std::get_if<Variable>(t)) check_head_var(v->name);
      }
    } else if (const auto* atom = std::get_if<AtomPattern>(&d)) {
      for (const auto& t : atom->args) require_bound(t, universals, "constraint head");
      for_each_var(*atom, check_head_var);
    } else {
      const auto& block = std::get<ExistsBlock>(d);
      if (block.vars.empty() || block.atoms.empty()) {
        throw Error(ErrorCode::kMalformed, "empty exists block");
      }
      std::set<std::string> scope = universals;
      for (const auto& v : block.vars) {
        if (!scope.insert(v).second) {
          throw Error(ErrorCode::kMalformed, "variable '" + v + "' bound twice");
        }
      }
      for (const auto& a : block.atoms) {
        for (const auto& t : a.args) require_bound(t, scope, "exists block");
        for_each_var(a, [&](const std::string& v) {
          if (!std::count(block.vars.begin(), block.vars.end(), v)) check_head_var(v);
        });
      }
    }
  }
}

namespace {

std::string canonical_var_name(std::size_t i) {
  static constexpr const char* kBase[] = {"x", "y", "z", "u", "v", "w"};
  std::string name = kBase[i % 6];
  if (i >= 6) name += std::to_string(i / 6);
  return name;
}

class Renamer {
 public:
  Term rename(const Term& t, const std::map<std::string, std::string>& scope) {
    if (const auto* v = std::get_if<Variable>(&t)) {
      auto it = scope.find(v->name);
      return it == scope.end() ? t : Term{Variable{it->second}};
    }
    return t;
  }

  AtomPattern rename(const AtomPattern& a, const std::map<std::string, std::string>& scope) {
    AtomPattern out{a.predicate, {}};
    for (const auto& t : a.args) out.args.push_back(rename(t, scope));
    return out;
  }

  // Assigns fresh names to binders of `binders` in first-occurrence order.
  void bind_in_order(const std::vector<const Term*>& occurrences,
                     const std::set<std::string>& binders, std::map<std::string, std::string>& scope,
                     std::vector<std::string>& order) {
    for (const Term* t : occurrences) {
      const auto* v = std::get_if<Variable>(t);
      if (!v || !binders.contains(v->name) || std::count(order.begin(), order.end(), v->name)) continue;
      order.push_back(v->name);
      scope[v->name] = canonical_var_name(next_++);
    }
  }

 private:
  std::size_t next_ = 0;
};

}  // namespace

Formula canonical(const Formula& f) {
  Renamer renamer;
  std::set<std::string> universals(f.universals.begin(), f.universals.end());

  std::vector<const Term*> occurrences;
  for (const auto& a : f.body)
    for (const auto& t : a.args) occurrences.push_back(&t);
  for (const auto& d : f.head) {
    if (const auto* eq = std::get_if<Equality>(&d)) {
      occurrences.push_back(&eq->lhs);
      occurrences.push_back(&eq->rhs);
    } else if (const auto* atom = std::get_if<AtomPattern>(&d)) {
      for (const auto& t : atom->args) occurrences.push_back(&t);
    } else {
      const auto& block = std::get<ExistsBlock>(d);
      std::set<std::string> shadowed(block.vars.begin(), block.vars.end());
      for (const auto& a : block.atoms)
        for (const auto& t : a.args) {
          const auto* v = std::get_if<Variable>(&t);
          if (!v || !shadowed.contains(v->name)) occurrences.push_back(&t);
        }
    }
  }

  std::map<std::string, std::string> scope;
  std::vector<std::string> order;
  renamer.bind_in_order(occurrences, universals, scope, order);

  Formula out;
  for (const auto& u : order) out.universals.push_back(scope.at(u));
  for (const auto& a : f.body) out.body.push_back(renamer.rename(a, scope));
  for (const auto& d : f.head) {
    if (const auto* eq = std::get_if<Equality>(&d)) {
      out.head.emplace_back(Equality{renamer.rename(eq->lhs, scope), renamer.rename(eq->rhs, scope)});
    } else if (const auto* atom = std::get_if<AtomPattern>(&d)) {
      out.head.emplace_back(renamer.rename(*atom, scope));
    } else {
      const auto& block = std::get<ExistsBlock>(d);
      std::set<std::string> binders(block.vars.begin(), block.vars.end());
      std::vector<const Term*> block_occurrences;
      for (const auto& a : block.atoms)
        for (const auto& t : a.args) block_occurrences.push_back(&t);
      auto block_scope = scope;
      for (const auto& v : block.vars) block_scope.erase(v);
      std::vector<std::string> block_order;
      renamer.bind_in_order(block_occurrences, binders, block_scope, block_order);
      ExistsBlock nb;
      for (const auto& v : block_order) nb.vars.push_back(block_scope.at(v));
      for (const auto& a : block.atoms) nb.atoms.push_back(renamer.rename(a, block_scope));
      out.head.emplace_back(std::move(nb));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text rendering
// ---------------------------------------------------------------------------

std::string to_string(const Constant& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c.value)) return std::to_string(*i);
  return std::get<std::string>(c.value);
}

std::string to_string(const Term& t) {
  if (const auto* v = std::get_if<Variable>(&t)) return v->name;
  return to_string(std::get<Constant>(t));
}

namespace {

template <typename Seq, typename Fn>
std::string join(const Seq& seq, const std::string& sep, Fn&& fn) {
  std::string out;
  bool first = true;
  for (const auto& x : seq) {
    if (!first) out += sep;
    first = false;
    out += fn(x);
  }
  return out;
}

std::string join_names(const std::vector<std::string>& names) {
  return join(names, ", ", [](const std::string& s) { return s; });
}

}  // namespace

std::string to_string(const Atom& a) {
  return a.predicate + "(" + join(a.args, ", ", [](const Constant& c) { return to_string(c); }) + ")";
}

std::string to_string(const AtomPattern& a) {
  return a.predicate + "(" + join(a.args, ", ", [](const Term& t) { return to_string(t); }) + ")";
}

std::string to_string(const Formula& f) {
  std::string out;
  if (!f.universals.empty()) out += "forall " + join_names(f.universals) + ": ";
  out += join(f.body, " & ", [](const AtomPattern& a) { return to_string(a); });
  out += " -> ";
  const bool several = f.head.size() > 1;
  out += join(f.head, " | ", [several](const HeadDisjunct& d) -> std::string {
    if (const auto* eq = std::get_if<Equality>(&d)) return to_string(eq->lhs) + " = " + to_string(eq->rhs);
    if (const auto* atom = std::get_if<AtomPattern>(&d)) return to_string(*atom);
    const auto& block = std::get<ExistsBlock>(d);
    std::string text = "exists " + join_names(block.vars) + ": " +
                       join(block.atoms, " & ", [](const AtomPattern& a) { return to_string(a); });
    return several ? "(" + text + ")" : text;
  });
  return out;
}

std::string to_string(const Payload& p) {
  return std::visit([](const auto& x) { return to_string(x); }, p);
}

std::string to_string(const ClassifiedFact& f) {
  return "fact [" + f.level.name + "] " + to_string(f.atom);
}

std::string to_string(const ClassifiedConstraint& c) {
  return "constraint [" + c.level.name + "] " + to_string(c.formula);
}

std::string target_text(const CoverTarget& t) {
  if (const auto* f = std::get_if<FactTarget>(&t)) return to_string(f->atom);
  if (const auto* c = std::get_if<ConstraintTarget>(&t)) return to_string(c->formula);
  const auto& p = std::get<PointerTarget>(t);
  std::string out = p.predicate + "(";
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.arity(); ++i) {
    if (i) out += ", ";
    out += i == p.value_position ? "@" + p.source_level.name : to_string(p.key_args[k++]);
  }
  return out + ")";
}

std::string to_string(const CoverStoryDecl& d) {
  std::string kind = std::holds_alternative<FactTarget>(d.target)         ? "fact"
                     : std::holds_alternative<ConstraintTarget>(d.target) ? "constraint"
                                                                          : "pointer";
  return "cover " + kind + " [" + d.level.name + "] " + (d.trigger ? "trigger " : "") + target_text(d.target);
}

std::string to_string(const Entry& e) {
  return std::visit([](const auto& x) { return to_string(x); }, e);
}

std::string to_string(const Change& c) {
  struct Visitor {
    std::string operator()(const InsertFact& x) const { return "insert " + to_string(x.fact); }
    std::string operator()(const DeleteFact& x) const { return "delete " + to_string(x.fact); }
    std::string operator()(const UpdateFact& x) const {
      return "update " + to_string(x.from) + " -> " + to_string(x.to);
    }
    std::string operator()(const InsertConstraint& x) const { return "insert " + to_string(x.constraint); }
    std::string operator()(const DeleteConstraint& x) const { return "delete " + to_string(x.constraint); }
    std::string operator()(const InsertCover& x) const { return "insert " + to_string(x.decl); }
    std::string operator()(const DeleteCover& x) const { return "delete " + to_string(x.decl); }
  };
  return std::visit(Visitor{}, c);
}

// ---------------------------------------------------------------------------
// Database
// ---------------------------------------------------------------------------

Database::Database(Lattice lattice) : lattice_(std::make_shared<const Lattice>(std::move(lattice))) {}

Database::Database(std::shared_ptr<const Lattice> lattice) : lattice_(std::move(lattice)) {}

namespace {

using ArityMap = std::map<std::string, std::size_t>;

void note_arity(ArityMap& m, const std::string& predicate, std::size_t n) {
  auto [it, inserted] = m.emplace(predicate, n);
  if (!inserted && it->second != n) {
    throw Error(ErrorCode::kArityMismatch, "predicate '" + predicate + "' used with arity " +
                                               std::to_string(n) + " and " + std::to_string(it->second));
  }
}

void note_formula(ArityMap& m, const Formula& f) {
  for (const auto& a : f.body) note_arity(m, a.predicate, a.args.size());
  for (const auto& d : f.head) {
    if (const auto* a = std::get_if<AtomPattern>(&d)) {
      note_arity(m, a->predicate, a->args.size());
    } else if (const auto* b = std::get_if<ExistsBlock>(&d)) {
      for (const auto& a : b->atoms) note_arity(m, a.predicate, a.args.size());
    }
  }
}

void note_target(ArityMap& m, const CoverTarget& t) {
  if (const auto* f = std::get_if<FactTarget>(&t)) {
    note_arity(m, f->atom.predicate, f->atom.args.size());
  } else if (const auto* c = std::get_if<ConstraintTarget>(&t)) {
    note_formula(m, c->formula);
  } else {
    const auto& p = std::get<PointerTarget>(t);
    note_arity(m, p.predicate, p.arity());
  }
}

}  // namespace

std::optional<std::size_t> Database::arity(const std::string& predicate) const {
  for (const auto& f : facts_)
    if (f.atom.predicate == predicate) return f.atom.args.size();
  ArityMap m;
  for (const auto& c : constraints_) note_formula(m, c.formula);
  for (const auto& d : cover_facts_) note_target(m, d.target);
  if (auto it = m.find(predicate); it != m.end()) return it->second;
  return std::nullopt;
}

Database Database::filter(const std::function<bool(const SecurityLevel&)>& keep) const {
  Database out(lattice_);
  for (const auto& f : facts_)
    if (keep(f.level)) out.facts_.insert(out.facts_.end(), f);
  for (const auto& c : constraints_)
    if (keep(c.level)) out.constraints_.insert(out.constraints_.end(), c);
  for (const auto& d : cover_facts_)
    if (keep(d.level)) out.cover_facts_.insert(out.cover_facts_.end(), d);
  for (const auto& d : cover_constraints_)
    if (keep(d.level)) out.cover_constraints_.insert(out.cover_constraints_.end(), d);
  return out;
}

bool operator==(const Database& a, const Database& b) {
  return (a.lattice_ == b.lattice_ || *a.lattice_ == *b.lattice_) && a.facts_ == b.facts_ &&
         a.constraints_ == b.constraints_ && a.cover_facts_ == b.cover_facts_ &&
         a.cover_constraints_ == b.cover_constraints_;
}

// Validated mutation primitives.
class Mutator {
 public:
  explicit Mutator(Database& db) : db_(db) {}

  void operator()(const InsertFact& c) {
    require_level(c.fact.level);
    check_arity_of(c.fact.atom.predicate, c.fact.atom.args.size());
    if (!db_.facts_.insert(c.fact).second) duplicate(to_string(c.fact));
  }

  void operator()(const DeleteFact& c) {
    if (db_.facts_.erase(c.fact) == 0) missing(to_string(c.fact));
  }

  void operator()(const UpdateFact& c) {
    auto it = db_.facts_.find(c.from);
    if (it == db_.facts_.end()) missing(to_string(c.from));
    if (c.to == c.from.atom) return;
    check_arity_of(c.to.predicate, c.to.args.size());
    ClassifiedFact replacement{c.to, c.from.level};
    if (db_.facts_.contains(replacement)) duplicate(to_string(replacement));
    db_.facts_.erase(it);
    db_.facts_.insert(std::move(replacement));
  }

  void operator()(const InsertConstraint& c) {
    require_level(c.constraint.level);
    validate(c.constraint.formula);
    ClassifiedConstraint entry{canonical(c.constraint.formula), c.constraint.level};
    ArityMap local;
    note_formula(local, entry.formula);
    for (const auto& [p, n] : local) check_arity_of(p, n);
    if (!db_.constraints_.insert(std::move(entry)).second) duplicate(to_string(c.constraint));
  }

  void operator()(const DeleteConstraint& c) {
    ClassifiedConstraint key{canonical(c.constraint.formula), c.constraint.level};
    if (db_.constraints_.erase(key) == 0) missing(to_string(c.constraint));
  }

  void operator()(const InsertCover& c) {
    require_level(c.decl.level);
    CoverStoryDecl decl = normalized(c.decl);
    if (const auto* p = std::get_if<PointerTarget>(&decl.target)) {
      require_level(p->source_level);
      if (p->value_position >= p->arity()) {
        throw Error(ErrorCode::kMalformed, "pointer value position out of range");
      }
      if (decl.trigger) {
        throw Error(ErrorCode::kRedundantTrigger,
                    "pointer cover stories already follow updates; trigger flag rejected");
      }
    }
    ArityMap local;
    note_target(local, decl.target);
    for (const auto& [pred, n] : local) check_arity_of(pred, n);
    auto& set = decl.is_constraint_cover() ? db_.cover_constraints_ : db_.cover_facts_;
    if (!set.insert(decl).second) duplicate(to_string(decl));
  }

  void operator()(const DeleteCover& c) {
    CoverStoryDecl decl = normalized(c.decl);
    auto& set = decl.is_constraint_cover() ? db_.cover_constraints_ : db_.cover_facts_;
    if (set.erase(decl) == 0) missing(to_string(c.decl));
  }

 private:
  static CoverStoryDecl normalized(const CoverStoryDecl& d) {
    CoverStoryDecl out = d;
    if (auto* c = std::get_if<ConstraintTarget>(&out.target)) {
      validate(c->formula);
      c->formula = canonical(c->formula);
    }
    return out;
  }

  void require_level(const SecurityLevel& l) const { db_.lattice().require(l); }

  void check_arity_of(const std::string& predicate, std::size_t n) const {
    auto existing = db_.arity(predicate);
    if (existing && *existing != n) {
      throw Error(ErrorCode::kArityMismatch, "predicate '" + predicate + "' has arity " +
                                                 std::to_string(*existing) + ", not " + std::to_string(n));
    }
  }

  [[noreturn]] static void duplicate(const std::string& what) {
    throw Error(ErrorCode::kDuplicateEntry, "already present: " + what);
  }
  [[noreturn]] static void missing(const std::string& what) {
    throw Error(ErrorCode::kNotFound, "not present: " + what);
  }

  Database& db_;
};

void apply_change_in_place(Database& db, const Change& change) {
  Mutator m(db);
  std::visit(m, change);
}

Database apply_change(const Database& db, const Change& change) {
  Database out = db;
  apply_change_in_place(out, change);
  return out;
}

Change inverse(const Change& change) {
  struct Visitor {
    Change operator()(const InsertFact& x) const { return DeleteFact{x.fact}; }
    Change operator()(const DeleteFact& x) const { return InsertFact{x.fact}; }
    Change operator()(const UpdateFact& x) const {
      return UpdateFact{ClassifiedFact{x.to, x.from.level}, x.from.atom};
    }
    Change operator()(const InsertConstraint& x) const { return DeleteConstraint{x.constraint}; }
    Change operator()(const DeleteConstraint& x) const { return InsertConstraint{x.constraint}; }
    Change operator()(const InsertCover& x) const { return DeleteCover{x.decl}; }
    Change operator()(const DeleteCover& x) const { return InsertCover{x.decl}; }
  };
  return std::visit(Visitor{}, change);
}

SecurityLevel change_level(const Change& change) {
  struct Visitor {
    SecurityLevel operator()(const InsertFact& x) const { return x.fact.level; }
    SecurityLevel operator()(const DeleteFact& x) const { return x.fact.level; }
    SecurityLevel operator()(const UpdateFact& x) const { return x.from.level; }
    SecurityLevel operator()(const InsertConstraint& x) const { return x.constraint.level; }
    SecurityLevel operator()(const DeleteConstraint& x) const { return x.constraint.level; }
    SecurityLevel operator()(const InsertCover& x) const { return x.decl.level; }
    SecurityLevel operator()(const DeleteCover& x) const { return x.decl.level; }
  };
  return std::visit(Visitor{}, change);
}

std::set<Constant> active_domain(const Database& db) {
  std::set<Constant> out;
  for (const auto& f : db.facts()) out.insert(f.atom.args.begin(), f.atom.args.end());
  auto add_pattern = [&](const AtomPattern& a) {
    for (const auto& t : a.args)
      if (const auto* c = std::get_if<Constant>(&t)) out.insert(*c);
  };
  for (const auto& c : db.constraints()) {
    for (const auto& a : c.formula.body) add_pattern(a);
    for (const auto& d : c.formula.head) {
      if (const auto* eq = std::get_if<Equality>(&d)) {
        for (const Term* t : {&eq->lhs, &eq->rhs})
          if (const auto* k = std::get_if<Constant>(t)) out.insert(*k);
      } else if (const auto* a = std::get_if<AtomPattern>(&d)) {
        add_pattern(*a);
      } else {
        for (const auto& a : std::get<ExistsBlock>(d).atoms) add_pattern(a);
      }
    }
  }
  return out;
}

}  // namespace coverstore
