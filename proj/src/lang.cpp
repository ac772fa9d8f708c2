#include "coverstore/lang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>

#include "coverstore/error.hpp"

namespace coverstore {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok { kIdent, kInt, kArrow, kPunct, kEnd };

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    const SourceSpan span{line, col};
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::kIdent, std::string(src.substr(i, j - i)), span});
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::kInt, std::string(src.substr(i, j - i)), span});
      advance(j - i);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      out.push_back({Tok::kArrow, "->", span});
      advance(2);
    } else if (std::string_view("(),:;[]{}<&|=@?").find(c) != std::string_view::npos) {
      out.push_back({Tok::kPunct, std::string(1, c), span});
      advance(1);
    } else {
      throw Error(ErrorCode::kSyntaxError, span, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::kEnd, "", SourceSpan{line, col}});
  return out;
}

std::string describe(const Token& t) {
  return t.kind == Tok::kEnd ? std::string("end of input") : "'" + t.text + "'";
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct SpannedEntry {
  Entry entry;
  SourceSpan span;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::kEnd; }

  bool is_punct(char c, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.kind == Tok::kPunct && t.text[0] == c;
  }
  bool is_word(std::string_view w, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.kind == Tok::kIdent && t.text == w;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kSyntaxError, peek().span, msg + ", found " + describe(peek()));
  }

  void expect_punct(char c) {
    if (!is_punct(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void expect_word(std::string_view w) {
    if (!is_word(w)) fail("expected '" + std::string(w) + "'");
    ++pos_;
  }
  void expect_arrow() {
    if (peek().kind != Tok::kArrow) fail("expected '->'");
    ++pos_;
  }
  void expect_end() {
    if (!at_end()) fail("expected end of input");
  }
  bool accept_punct(char c) {
    if (!is_punct(c)) return false;
    ++pos_;
    return true;
  }
  bool accept_word(std::string_view w) {
    if (!is_word(w)) return false;
    ++pos_;
    return true;
  }

  std::string identifier(const char* what) {
    if (peek().kind != Tok::kIdent) fail(std::string("expected ") + what);
    return toks_[pos_++].text;
  }

  std::int64_t integer() {
    const auto& t = toks_[pos_];
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      throw Error(ErrorCode::kSyntaxError, t.span, "integer literal out of range: " + t.text);
    }
    ++pos_;
    return v;
  }

  // --- lattice -------------------------------------------------------------

  Lattice lattice_block() {
    const SourceSpan span = peek().span;
    expect_word("lattice");
    expect_punct('{');
    expect_word("levels");
    expect_punct(':');
    std::vector<std::string> levels{identifier("level name")};
    while (accept_punct(',')) levels.push_back(identifier("level name"));
    expect_punct(';');
    expect_word("order");
    expect_punct(':');
    std::vector<std::pair<std::string, std::string>> pairs;
    if (!is_punct(';')) {
      do {
        std::string lo = identifier("level name");
        expect_punct('<');
        std::string hi = identifier("level name");
        pairs.emplace_back(std::move(lo), std::move(hi));
      } while (accept_punct(','));
    }
    expect_punct(';');
    expect_punct('}');
    try {
      return Lattice::build(levels, pairs);
    } catch (const Error& e) {
      throw Error(ErrorCode::kSemanticError, span, e.what());
    }
  }

  // --- ground atoms ---------------------------------------------------------

  Constant constant() {
    if (peek().kind == Tok::kInt) return Constant::integer(integer());
    if (peek().kind == Tok::kIdent) return Constant::symbol(toks_[pos_++].text);
    fail("expected a constant");
  }

  Atom atom() {
    Atom a{identifier("predicate name"), {}};
    expect_punct('(');
    if (!is_punct(')')) {
      do a.args.push_back(constant());
      while (accept_punct(','));
    }
    expect_punct(')');
    return a;
  }

  AtomQuery query() {
    AtomQuery q{identifier("predicate name"), {}};
    expect_punct('(');
    if (!is_punct(')')) {
      do {
        if (accept_punct('?')) {
          q.args.emplace_back(std::nullopt);
        } else {
          q.args.emplace_back(constant());
        }
      } while (accept_punct(','));
    }
    expect_punct(')');
    return q;
  }

  // Pointer payload: exactly one argument is "@Level".
  PointerTarget pointer(const Lattice& lat) {
    const SourceSpan span = peek().span;
    PointerTarget p;
    p.predicate = identifier("predicate name");
    expect_punct('(');
    std::size_t index = 0;
    bool seen = false;
    do {
      if (accept_punct('@')) {
        const SourceSpan lspan = peek().span;
        if (seen) throw Error(ErrorCode::kSyntaxError, lspan, "pointer has more than one '@level'");
        p.source_level = level_name(lat, lspan, identifier("level name"));
        p.value_position = index;
        seen = true;
      } else {
        p.key_args.push_back(constant());
      }
      ++index;
    } while (accept_punct(','));
    expect_punct(')');
    if (!seen) throw Error(ErrorCode::kSyntaxError, span, "pointer needs one '@level' argument");
    return p;
  }

  // --- formulas -------------------------------------------------------------

  Formula formula() {
    Formula f;
    scopes_.clear();
    if (is_word("forall") && peek(1).kind == Tok::kIdent) {
      ++pos_;
      f.universals = binders();
      expect_punct(':');
    }
    scopes_.push_back(f.universals);
    f.body.push_back(atom_pattern());
    while (accept_punct('&')) f.body.push_back(atom_pattern());
    expect_arrow();
    head(f.head);
    scopes_.clear();
    return f;
  }

  std::vector<std::string> binders() {
    std::vector<std::string> out{identifier("variable name")};
    while (accept_punct(',')) out.push_back(identifier("variable name"));
    return out;
  }

  void head(std::vector<HeadDisjunct>& out) {
    disjunct(out);
    while (accept_punct('|')) disjunct(out);
  }

  void disjunct(std::vector<HeadDisjunct>& out) {
    if (accept_punct('(')) {
      head(out);
      expect_punct(')');
      return;
    }
    if (is_word("exists") && peek(1).kind == Tok::kIdent && !is_punct('(', 1)) {
      ++pos_;
      ExistsBlock block;
      block.vars = binders();
      expect_punct(':');
      scopes_.push_back(block.vars);
      block.atoms.push_back(atom_pattern());
      while (accept_punct('&')) block.atoms.push_back(atom_pattern());
      scopes_.pop_back();
      out.emplace_back(std::move(block));
      return;
    }
    if (peek().kind == Tok::kIdent && is_punct('(', 1)) {
      out.emplace_back(atom_pattern());
      return;
    }
    Term lhs = term();
    expect_punct('=');
    Term rhs = term();
    out.emplace_back(Equality{std::move(lhs), std::move(rhs)});
  }

  AtomPattern atom_pattern() {
    AtomPattern a{identifier("predicate name"), {}};
    expect_punct('(');
    if (!is_punct(')')) {
      do a.args.push_back(term());
      while (accept_punct(','));
    }
    expect_punct(')');
    return a;
  }

  Term term() {
    const Token& t = peek();
    if (t.kind == Tok::kInt) return Constant::integer(integer());
    if (t.kind != Tok::kIdent) fail("expected a variable or constant");
    ++pos_;
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (std::count(it->begin(), it->end(), t.text)) return Variable{t.text};
    }
    if (std::islower(static_cast<unsigned char>(t.text[0]))) {
      throw Error(ErrorCode::kUnboundVariable, t.span, "variable '" + t.text + "' is not bound");
    }
    return Constant::symbol(t.text);
  }

  // --- declarations ---------------------------------------------------------

  static SecurityLevel level_name(const Lattice& lat, SourceSpan span, const std::string& name) {
    SecurityLevel l{name};
    if (!lat.contains(l)) throw Error(ErrorCode::kSemanticError, span, "unknown level '" + name + "'");
    return l;
  }

  std::optional<SecurityLevel> optional_level(const Lattice& lat) {
    if (!accept_punct('[')) return std::nullopt;
    const SourceSpan span = peek().span;
    auto l = level_name(lat, span, identifier("level name"));
    expect_punct(']');
    return l;
  }

  SecurityLevel resolve_level(std::optional<SecurityLevel> given, std::optional<SecurityLevel> fallback,
                              SourceSpan span) {
    if (given) return *given;
    if (fallback) return *fallback;
    throw Error(ErrorCode::kSyntaxError, span, "expected '[level]'");
  }

  Formula checked_formula() {
    Formula f = formula();
    try {
      validate(f);
    } catch (const Error& e) {
      throw Error(e.code(), peek().span, e.detail());
    }
    return f;
  }

  // entry := "fact" [level] atom | "constraint" [level] formula
  //        | "cover" ("fact"|"constraint"|"pointer") [level] ["trigger"] payload
  SpannedEntry entry(const Lattice& lat, std::optional<SecurityLevel> default_level) {
    const SourceSpan span = peek().span;
    if (accept_word("fact")) {
      auto l = optional_level(lat);
      return {ClassifiedFact{atom(), resolve_level(l, default_level, span)}, span};
    }
    if (accept_word("constraint")) {
      auto l = optional_level(lat);
      auto fallback = default_level ? default_level : std::optional<SecurityLevel>(lat.bottom());
      return {ClassifiedConstraint{checked_formula(), resolve_level(l, fallback, span)}, span};
    }
    if (accept_word("cover")) {
      const std::string kind = is_word("fact") || is_word("constraint") || is_word("pointer")
                                   ? toks_[pos_++].text
                                   : (fail("expected 'fact', 'constraint' or 'pointer'"), std::string());
      CoverStoryDecl decl;
      decl.level = resolve_level(optional_level(lat), default_level, span);
      if (is_word("trigger") && peek(1).kind == Tok::kIdent) {
        ++pos_;
        decl.trigger = true;
      }
      if (kind == "fact") {
        decl.target = FactTarget{atom()};
      } else if (kind == "constraint") {
        decl.target = ConstraintTarget{checked_formula()};
      } else {
        decl.target = pointer(lat);
      }
      return {std::move(decl), span};
    }
    fail("expected 'fact', 'constraint' or 'cover'");
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::vector<std::string>> scopes_;
};

Change entry_change(bool insert, Entry e) {
  return std::visit(
      [insert](auto&& x) -> Change {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ClassifiedFact>) {
          if (insert) return InsertFact{std::move(x)};
          return DeleteFact{std::move(x)};
        } else if constexpr (std::is_same_v<T, ClassifiedConstraint>) {
          if (insert) return InsertConstraint{std::move(x)};
          return DeleteConstraint{std::move(x)};
        } else {
          if (insert) return InsertCover{std::move(x)};
          return DeleteCover{std::move(x)};
        }
      },
      std::move(e));
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

Database parse_database(std::string_view text) {
  Parser p(text);
  if (!p.is_word("lattice")) p.fail("database file must start with a lattice block");
  Database db(p.lattice_block());
  const Lattice& lat = db.lattice();

  std::vector<SpannedEntry> cover_constraints;
  auto apply = [&](const SpannedEntry& e) {
    try {
      apply_change_in_place(db, entry_change(true, e.entry));
    } catch (const Error& err) {
      throw Error(ErrorCode::kSemanticError, e.span, err.what());
    }
  };

  while (!p.at_end()) {
    if (p.is_word("lattice")) {
      throw Error(ErrorCode::kSemanticError, p.peek().span, "duplicate lattice declaration");
    }
    SpannedEntry e = p.entry(lat, std::nullopt);
    p.expect_punct(';');
    const auto* decl = std::get_if<CoverStoryDecl>(&e.entry);
    if (decl && decl->is_constraint_cover()) {
      cover_constraints.push_back(std::move(e));
    } else {
      apply(e);
    }
  }

  // A cover constraint must name a constraint of the database, up to
  // variable renaming.
  for (const auto& e : cover_constraints) {
    const auto& target = std::get<ConstraintTarget>(std::get<CoverStoryDecl>(e.entry).target);
    Formula key = canonical(target.formula);
    bool found = std::any_of(db.constraints().begin(), db.constraints().end(),
                             [&](const ClassifiedConstraint& c) { return c.formula == key; });
    if (!found) {
      throw Error(ErrorCode::kSemanticError, e.span,
                  "cover constraint does not match any declared constraint: " + to_string(target.formula));
    }
    apply(e);
  }
  return db;
}

std::string serialize(const Database& db) {
  const Lattice& lat = db.lattice();
  std::string out = "lattice { levels: ";
  for (std::size_t i = 0; i < lat.levels().size(); ++i) {
    if (i) out += ", ";
    out += lat.levels()[i].name;
  }
  out += "; order:";
  const auto pairs = lat.covering_pairs();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out += i ? ", " : " ";
    out += pairs[i].first.name + " < " + pairs[i].second.name;
  }
  out += "; }\n";

  auto section = [&](std::vector<std::string> lines) {
    if (lines.empty()) return;
    out += "\n";
    for (const auto& l : lines) out += l + ";\n";
  };

  // Constraints sort by their text, then level.
  auto by_text = [](const auto& set, auto text_of) {
    std::vector<std::pair<std::pair<std::string, std::string>, std::string>> keyed;
    for (const auto& x : set) keyed.push_back({text_of(x), to_string(x)});
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::string> lines;
    for (auto& [k, line] : keyed) lines.push_back(std::move(line));
    return lines;
  };

  section(by_text(db.constraints(), [](const ClassifiedConstraint& c) {
    return std::make_pair(to_string(c.formula), c.level.name);
  }));

  std::vector<std::string> facts;
  for (const auto& f : db.facts()) facts.push_back(to_string(f));
  section(std::move(facts));

  section(by_text(db.cover_constraints(), [](const CoverStoryDecl& d) {
    return std::make_pair(target_text(d.target), d.level.name);
  }));

  std::vector<std::string> covers;
  for (const auto& d : db.cover_facts()) covers.push_back(to_string(d));
  section(std::move(covers));
  return out;
}

Formula parse_formula(std::string_view text) {
  Parser p(text);
  Formula f = p.checked_formula();
  p.expect_end();
  return f;
}

Atom parse_atom(std::string_view text) {
  Parser p(text);
  Atom a = p.atom();
  p.expect_end();
  return a;
}

bool AtomQuery::matches(const Atom& a) const {
  if (a.predicate != predicate || a.args.size() != args.size()) return false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] && *args[i] != a.args[i]) return false;
  }
  return true;
}

bool AtomQuery::matches(const CoverTarget& t) const {
  if (const auto* f = std::get_if<FactTarget>(&t)) return matches(f->atom);
  if (const auto* p = std::get_if<PointerTarget>(&t)) {
    if (p->predicate != predicate || p->arity() != args.size()) return false;
    std::size_t k = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i == p->value_position) continue;
      if (args[i] && *args[i] != p->key_args[k]) return false;
      ++k;
    }
    return true;
  }
  return false;
}

AtomQuery parse_query(std::string_view text) {
  Parser p(text);
  AtomQuery q = p.query();
  p.expect_end();
  return q;
}

Entry parse_entry(std::string_view text, const Lattice& lattice, std::optional<SecurityLevel> default_level) {
  Parser p(text);
  SpannedEntry e = p.entry(lattice, default_level);
  p.accept_punct(';');
  p.expect_end();
  return std::move(e.entry);
}

Change parse_change(std::string_view text, const Lattice& lattice, std::optional<SecurityLevel> default_level) {
  Parser p(text);
  Change change;
  if (p.accept_word("insert")) {
    change = entry_change(true, p.entry(lattice, default_level).entry);
  } else if (p.accept_word("delete")) {
    change = entry_change(false, p.entry(lattice, default_level).entry);
  } else if (p.accept_word("update")) {
    const SourceSpan span = p.peek().span;
    std::optional<SecurityLevel> level;
    if (p.is_word("fact") && (p.is_punct('[', 1) || p.peek(1).kind == Tok::kIdent)) {
      p.expect_word("fact");
      level = p.optional_level(lattice);
    }
    SecurityLevel l = p.resolve_level(level, default_level, span);
    Atom from = p.atom();
    p.expect_arrow();
    Atom to = p.atom();
    change = UpdateFact{ClassifiedFact{std::move(from), l}, std::move(to)};
  } else {
    p.fail("expected 'insert', 'delete' or 'update'");
  }
  p.accept_punct(';');
  p.expect_end();
  return change;
}

}  // namespace coverstore
