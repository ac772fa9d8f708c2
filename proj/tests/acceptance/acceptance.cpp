// Acceptance suite: one PASS/FAIL line per criterion on stdout, details in a
// transcript (optionally written to a file with --transcript PATH).

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "coverstore/admin.hpp"
#include "coverstore/error.hpp"
#include "coverstore/guard.hpp"
#include "coverstore/lang.hpp"
#include "coverstore/restore.hpp"
#include "coverstore/txn.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "random_db.hpp"

using namespace coverstore;
using namespace coverstore::testing;

namespace {

// Randomized criteria run this many cases; the requirement is 200.
constexpr int kCases = 250;
constexpr int kRequiredCases = 200;

class Check {
 public:
  Check(std::ostream& log, std::string id) : log_(log), id_(std::move(id)) {}

  bool expect(bool ok, const std::string& what) {
    log_ << id_ << (ok ? " ok   " : " FAIL ") << what << "\n";
    if (!ok) ++failures_;
    return ok;
  }
  void count_case() { ++cases_; }

  int failures() const { return failures_; }
  int cases() const { return cases_; }

 private:
  std::ostream& log_;
  std::string id_;
  int failures_ = 0;
  int cases_ = 0;
};

struct Result {
  std::string id;
  std::string title;
  bool pass;
  std::string detail;
};

Database after(const std::string& file, const std::string& change_text) {
  const Database db = load(file);
  return apply_change(db, change(change_text, db.lattice()));
}

std::string joined(const RestoreOutcome& o) {
  std::string out;
  for (const auto& a : o.actions) out += (out.empty() ? "" : "; ") + to_string(a);
  return out.empty() ? "(none)" : out;
}

std::string render_real_world(const RealWorld& rw) {
  std::string out;
  for (const auto& a : rw.facts) out += "fact " + to_string(a) + "\n";
  for (const auto& f : rw.constraints) out += "constraint " + to_string(f) + "\n";
  return out;
}

bool secure(const Database& db) { return is_secure(db, db.lattice().top()).secure; }

CommitOutcome commit_at(Store& s, const std::string& level, const std::vector<std::string>& changes) {
  Transaction t = s.begin(L(level), L(level));
  for (const auto& c : changes) txn_write(t, change(c, t.base().lattice()));
  return s.commit(t);
}

// ---------------------------------------------------------------------------
// 1. Examples
// ---------------------------------------------------------------------------

void check_restore(Check& c, const std::string& name, const Database& db, const RestoreConfig& cfg,
                   RestoreOutcome::Status status, const std::string& actions) {
  const RestoreResult r = restore(db, cfg);
  c.expect(r.outcome.status == status, name + " status");
  c.expect(joined(r.outcome) == actions, name + " actions: " + joined(r.outcome));
  if (status == RestoreOutcome::Status::kSecured) c.expect(secure(r.db), name + " result secure at top");
}

Result examples(std::ostream& log) {
  Check c(log, "1");
  const auto secured = RestoreOutcome::Status::kSecured;

  // Examples 1-5: verdicts and real worlds.
  const Database ex1 = load("example1.mldb");
  c.expect(secure(ex1), "example 1 secure");
  c.expect(render_real_world(real_world(view_at(ex1, L("U")))) ==
               "fact Employee(Dupont)\nfact Salary(Dupont, 1500)\n"
               "constraint forall x: Employee(x) -> exists y: Salary(x, y)\n"
               "constraint forall x, y: Salary(x, y) -> Employee(x)\n",
           "example 1 real world at U");
  c.expect(render_real_world(real_world(ex1)) ==
               "fact Employee(Dupont)\nfact Salary(Dupont, 2000)\n"
               "constraint forall x: Employee(x) -> exists y: Salary(x, y)\n"
               "constraint forall x, y: Salary(x, y) -> Employee(x)\n",
           "example 1 real world at S");
  c.expect(real_world(load("example1_polyinstantiated.mldb")).facts.size() == 3,
           "example 1 without the declaration: 1500 is a second salary");

  const SecurityReport ex2 = is_secure(load("example2_inconsistent.mldb"), L("S"));
  c.expect(!ex2.secure && ex2.at(L("U"))->consistent() && !ex2.at(L("S"))->consistent(),
           "example 2 as stated is inconsistent at S");
  c.expect(secure(load("example2_covered.mldb")), "example 2 with the constraint also covered is secure");
  c.expect(secure(load("example2_dropped.mldb")), "example 2 with the constraint dropped is secure");

  const Database ex3 = load("example3.mldb");
  c.expect(secure(ex3) && check_axiom3(ex3).empty(), "example 3 secure (C1 and C2 incomparable)");
  c.expect(real_world(ex3).facts == AtomSet{atom("Employee(Dupont)"), atom("Salary(Dupont, 2000)")},
           "example 3 real world at S");

  const Database ex4 = load("example4.mldb");
  c.expect(render_real_world(real_world(ex4)) == read_text("example4.realworld.txt"),
           "example 4 real world matches the golden");
  c.expect(secure(ex4), "example 4 secure");

  const SecurityReport ex5 = is_secure(load("example5.mldb"), L("S"));
  c.expect(!ex5.secure && !ex5.at(L("U"))->consistent() && ex5.at(L("S"))->consistent(),
           "example 5 consistent at S but not secure");
  c.expect(render_machine(ex5).find("VIOLATION U forall x: Employee(x) -> exists y: Salary(x, y) | x=Dupont") !=
               std::string::npos,
           "example 5 names the U-level existence violation");

  // Example 6.
  {
    Store s(ex1);
    const std::string before = serialize(*s.snapshot());
    const CommitOutcome out = commit_at(s, "U", {"insert fact [U] Employee(Durand)"});
    c.expect(std::holds_alternative<Rejected>(out) && serialize(*s.snapshot()) == before,
             "example 6 case 1 rejected, store unchanged");
  }
  {
    Store s(ex1);
    const CommitOutcome out = commit_at(s, "U", {"update fact [U] Salary(Dupont, 1500) -> Salary(Dupont, 1600)"});
    const auto* committed = std::get_if<Committed>(&out);
    c.expect(committed && !committed->global_secure && committed->alert_id && s.admin().alerts().size() == 1 &&
                 s.admin().alerts()[0].kind == Alert::Kind::kPostCommitInsecure,
             "example 6 case 2 committed with one PostCommitInsecure alert");
  }

  // Examples 7-10 and the three salaries.
  const std::string update_u = "update fact [U] Salary(Dupont, 1500) -> Salary(Dupont, 1600)";
  check_restore(c, "example 7", after("example7.mldb", update_u), {}, secured,
                "Step2 delete cover fact [S] Salary(Dupont, 1500); CsRule insert cover fact [S] Salary(Dupont, 1600)");
  check_restore(c, "example 8", after("example1.mldb", update_u), {}, secured,
                "Step2 delete cover fact [S] Salary(Dupont, 1500)");
  check_restore(c, "example 9", after("example1.mldb", "update fact [U] Salary(Dupont, 1500) -> Salary(Dupont, 2000)"),
                {}, secured,
                "Step1 delete fact [S] Salary(Dupont, 2000); Step2 delete cover fact [S] Salary(Dupont, 1500)");

  const Database ex10 = after("example10.mldb", "update fact [C1] Salary(Dupont, 1500) -> Salary(Dupont, 1600)");
  check_restore(c, "example 10", ex10, {}, RestoreOutcome::Status::kPending,
                "Step2 delete cover fact [S] Salary(Dupont, 1500)");
  {
    const RestoreResult r = restore(ex10, {});
    c.expect(r.outcome.pending.size() == 1 && r.outcome.pending[0].level == L("S") &&
                 to_string(r.outcome.pending[0]) ==
                     "cover fact [S] Salary(Dupont, 1600) OR cover fact [S] Salary(Dupont, 2000)",
             "example 10 pending sentence at S");
    bool low_ok = true;
    for (const char* l : {"U", "C1", "C2"}) low_ok = low_ok && is_secure(r.db, L(l)).secure;
    c.expect(low_ok, "example 10 views U, C1, C2 consistent");
  }

  const Database three = after("three_salaries.mldb", "insert fact [U] Salary(Dupont, 1600)");
  for (std::uint64_t seed : {1u, 2u, 3u, 42u}) {
    RestoreConfig cfg;
    cfg.policy = RestoreConfig::Policy::kNonDeterministic;
    cfg.seed = seed;
    const RestoreResult a = restore(three, cfg);
    const RestoreResult b = restore(three, cfg);
    const std::string acts = joined(a.outcome);
    const bool one_of = acts == "Policy insert cover fact [S] Salary(Dupont, 1500)" ||
                        acts == "Policy insert cover fact [S] Salary(Dupont, 1600)";
    c.expect(a.outcome.status == secured && one_of && secure(a.db),
             "three salaries, seed " + std::to_string(seed) + ": " + acts);
    c.expect(acts == joined(b.outcome), "three salaries, seed " + std::to_string(seed) + " reproducible");
  }
  return {"1", "example reproduction (exact)", c.failures() == 0, "zero tolerance"};
}

// ---------------------------------------------------------------------------
// 2. Extension scenarios
// ---------------------------------------------------------------------------

Result extensions(std::ostream& log) {
  Check c(log, "2");
  const std::string update_c1 = "update fact [C1] Salary(Dupont, 1500) -> Salary(Dupont, 1600)";
  {
    Store s(load("trigger.mldb"));
    const CommitOutcome out = commit_at(s, "C1", {update_c1});
    const Database expected = parse_database(
        "lattice { levels: U, C1, C2, S; order: U < C1, U < C2, C1 < S, C2 < S; }\n"
        "constraint [U] forall x,y: Salary(x,y) -> Employee(x);\n"
        "constraint [U] forall x: Employee(x) -> exists y: Salary(x,y);\n"
        "constraint [U] forall x,y,y2: Salary(x,y) & Salary(x,y2) -> y = y2;\n"
        "fact [C1] Employee(Dupont);\nfact [C2] Employee(Dupont);\n"
        "fact [C1] Salary(Dupont, 1600);\nfact [C2] Salary(Dupont, 2000);\n"
        "cover fact [S] trigger Salary(Dupont, 1600);\n");
    const auto* committed = std::get_if<Committed>(&out);
    c.expect(committed && committed->global_secure && !committed->restore, "trigger: committed, secure, no restoration");
    c.expect(serialize(*s.snapshot()) == serialize(expected), "trigger: database becomes the stated state");
  }
  {
    Store s(load("pointer.mldb"));
    const CommitOutcome out = commit_at(s, "C1", {update_c1});
    const auto* committed = std::get_if<Committed>(&out);
    c.expect(committed && committed->global_secure && !committed->restore && s.admin().alerts().empty(),
             "pointer: C1 update committed with no restoration actions");
  }
  {
    RestoreConfig cfg;
    cfg.policy = RestoreConfig::Policy::kLevelPriority;
    cfg.priority["Salary"] = {L("C2"), L("C1")};
    const RestoreResult r = restore(after("example10.mldb", update_c1), cfg);
    c.expect(r.outcome.status == RestoreOutcome::Status::kSecured &&
                 joined(r.outcome) ==
                     "Step2 delete cover fact [S] Salary(Dupont, 1500); Policy insert cover fact [S] Salary(Dupont, 1600)",
             "priority C2 over C1: " + joined(r.outcome));
  }
  return {"2", "trigger, pointer and priority scenarios", c.failures() == 0, "zero tolerance"};
}

// ---------------------------------------------------------------------------
// 3. Properties
// ---------------------------------------------------------------------------

Result property(std::ostream& log, const std::string& id, const std::string& title, std::uint64_t seed,
                const std::function<void(Gen&, Check&)>& one_case) {
  Check c(log, id);
  Gen g(seed);
  for (int attempt = 0; c.cases() < kCases && attempt < 20 * kCases; ++attempt) one_case(g, c);
  const bool enough = c.cases() >= kRequiredCases;
  std::ostringstream detail;
  detail << c.cases() << " cases, " << c.failures() << " failures, seed " << seed << ", exact";
  return {id, title, enough && c.failures() == 0, detail.str()};
}

void theorem5_case(Gen& g, Check& c) {
  const Lattice lat = random_lattice(g);
  // Steps 1 and 2 bring most random databases within the axioms.
  const Database db = step2_prune(step1_downgrade(random_database(g, lat)).db).db;
  if (!check_axiom3(db).empty() || !check_axiom4(db).empty()) return;
  if (db.cover_facts().empty() && db.cover_constraints().empty()) return;
  c.count_case();
  bool ok = true;
  for (const auto& d : db.cover_facts()) {
    for (const auto& f : db.facts()) {
      if (f.level != d.level) continue;
      if (const auto* t = std::get_if<FactTarget>(&d.target)) ok = ok && t->atom != f.atom;
      else {
        const auto& p = std::get<PointerTarget>(d.target);
        ok = ok && !(p.source_level == d.level && p.matches(f.atom));
      }
    }
  }
  for (const auto& d : db.cover_constraints())
    for (const auto& k : db.constraints())
      ok = ok && !(k.level == d.level && k.formula == std::get<ConstraintTarget>(d.target).formula);
  c.expect(ok, "case " + std::to_string(c.cases()) + ": " + std::to_string(db.facts().size()) + " facts, " +
                   std::to_string(db.cover_facts().size() + db.cover_constraints().size()) + " covers");
}

void mus_case(Gen& g, Check& c) {
  const Lattice lat = random_lattice(g);
  const Database db = random_database(g, lat);
  const SecurityLevel level = random_level(g, lat);
  const ClassifiedRealWorld crw = classified_real_world(view_at(db, level));
  const RealWorld rw = crw.unclassified();
  c.count_case();
  std::set<oracle::Subset> ours;
  const auto sets = find_mus(crw.facts, crw.constraints);
  for (const auto& m : sets) ours.insert(oracle::as_subset(m));
  c.expect(ours.size() == sets.size() && ours == oracle::minimal_inconsistent_sets(rw.facts, rw.constraints),
           "case " + std::to_string(c.cases()) + " at " + level.name + ": " + std::to_string(sets.size()) + " sets");
}

RestoreConfig random_config(Gen& g, const Lattice& lat) {
  RestoreConfig cfg;
  cfg.policy = static_cast<RestoreConfig::Policy>(g.below(3));
  cfg.seed = g.below(1u << 20);
  if (cfg.policy == RestoreConfig::Policy::kLevelPriority) {
    std::vector<SecurityLevel> order = lat.levels();
    std::shuffle(order.begin(), order.end(), g.engine());
    cfg.priority["Sal"] = order;
  }
  return cfg;
}

void secured_case(Gen& g, Check& c) {
  const Lattice lat = random_lattice(g);
  const Database db = random_database(g, lat);
  const RestoreConfig cfg = random_config(g, lat);
  const RestoreResult r = restore(db, cfg);
  if (r.outcome.status != RestoreOutcome::Status::kSecured) return;
  c.count_case();
  c.expect(secure(r.db) && oracle::secure_at_top(r.db),
           "case " + std::to_string(c.cases()) + ": " + std::to_string(r.outcome.actions.size()) + " actions");
}

void idempotence_case(Gen& g, Check& c) {
  const Lattice lat = random_lattice(g);
  const Database db = random_database(g, lat);
  const RestoreConfig cfg = random_config(g, lat);
  const RestoreResult r = restore(db, cfg);
  if (r.outcome.status != RestoreOutcome::Status::kSecured) return;
  c.count_case();
  const RestoreResult again = restore(r.db, cfg);
  c.expect(again.outcome.actions.empty() && serialize(again.db) == serialize(r.db),
           "case " + std::to_string(c.cases()) + ": second run " + joined(again.outcome));
}

void rejection_case(Gen& g, Check& c) {
  const Lattice lat = random_lattice(g);
  Store s(random_database(g, lat));
  const std::string before = serialize(*s.snapshot());
  const SecurityLevel level = random_level(g, lat);
  Transaction t = s.begin(level, lat.top());
  for (int i = 0; i < 3; ++i)
    if (auto ch = random_change_at(g, t.working(), level)) txn_write(t, *ch);
  const CommitOutcome out = s.commit(t);
  if (!std::holds_alternative<Rejected>(out)) return;
  c.count_case();
  c.expect(serialize(*s.snapshot()) == before && s.version() == 0,
           "case " + std::to_string(c.cases()) + " at " + level.name + ": " + std::to_string(t.changes().size()) +
               " changes rejected");
}

void covert_channel_case(Gen& g, Check& c) {
  const Lattice lat = random_lattice(g);
  std::vector<SecurityLevel> below_top;
  for (const auto& l : lat.levels())
    if (l != lat.top()) below_top.push_back(l);
  if (below_top.empty()) return;
  const SecurityLevel level = g.pick(below_top);
  const Database db = random_database(g, lat);

  std::vector<Change> changes;
  Database working = db;
  for (int i = 0; i < 3; ++i) {
    if (auto ch = random_change_at(g, working, level)) {
      working = apply_change(working, *ch);
      changes.push_back(*ch);
    }
  }

  // Arbitrary edits strictly above the level: inserts, deletes and covers.
  std::vector<SecurityLevel> higher;
  for (const auto& l : lat.levels())
    if (lat.strictly_dominates(l, level)) higher.push_back(l);
  Database other = db;
  for (int i = 0; i < 5; ++i) {
    const SecurityLevel h = g.pick(higher);
    Change edit = InsertFact{{random_atom(g), h}};
    std::vector<ClassifiedFact> up;
    for (const auto& f : other.facts())
      if (lat.strictly_dominates(f.level, level)) up.push_back(f);
    switch (g.below(3)) {
      case 0:
        if (!up.empty()) edit = DeleteFact{g.pick(up)};
        break;
      case 1:
        if (!other.facts().empty()) {
          auto it = other.facts().begin();
          std::advance(it, static_cast<std::ptrdiff_t>(g.below(other.facts().size())));
          edit = InsertCover{{FactTarget{it->atom}, h, false}};
        }
        break;
      default:
        break;
    }
    try {
      apply_change_in_place(other, edit);
    } catch (const Error&) {
    }
  }
  if (serialize(other) == serialize(db)) return;
  c.count_case();

  auto decide = [&](const Database& base) {
    Store s(base);
    Transaction t = s.begin(level, lat.top());
    for (const auto& ch : changes) txn_write(t, ch);
    const CommitOutcome out = s.commit(t);
    if (std::holds_alternative<Committed>(out)) return std::string("committed");
    return "rejected: " + summarize(std::get<Rejected>(out).report);
  };
  const std::string a = decide(db);
  const std::string b = decide(other);
  c.expect(a == b, "case " + std::to_string(c.cases()) + " at " + level.name + ": " + a);
}

bool view_subset(const Database& a, const Database& b) {
  auto in = [](const auto& x, const auto& y) {
    for (const auto& e : x)
      if (!y.contains(e)) return false;
    return true;
  };
  return in(a.facts(), b.facts()) && in(a.constraints(), b.constraints()) && in(a.cover_facts(), b.cover_facts()) &&
         in(a.cover_constraints(), b.cover_constraints());
}

void monotonicity_case(Gen& g, Check& c) {
  const Lattice lat = random_lattice(g);
  const Database db = random_database(g, lat);
  c.count_case();
  bool ok = true;
  int pairs = 0;
  for (const auto& a : lat.levels()) {
    for (const auto& b : lat.levels()) {
      if (!lat.dominates(b, a)) continue;
      ++pairs;
      ok = ok && view_subset(view_at(db, a), view_at(db, b));
      // The view at a is exactly the a-dominated part of the view at b.
      ok = ok && view_at(view_at(db, b), a) == view_at(db, a);
    }
  }
  c.expect(ok, "case " + std::to_string(c.cases()) + ": " + std::to_string(pairs) + " level pairs");
}

void round_trip_case(Gen& g, Check& c) {
  const Database db = random_database(g, random_lattice(g));
  c.count_case();
  const std::string text = serialize(db);
  const Database back = parse_database(text);
  c.expect(back == db && serialize(back) == text,
           "case " + std::to_string(c.cases()) + ": " + std::to_string(text.size()) + " bytes");
}

std::vector<Result> run_all(std::ostream& log) {
  std::vector<Result> out;
  out.push_back(examples(log));
  out.push_back(extensions(log));
  out.push_back(property(log, "3a", "theorem (5) under axioms (3) and (4)", 0x3a, theorem5_case));
  out.push_back(property(log, "3b", "find_mus equals the power-set oracle", 0x3b, mus_case));
  out.push_back(property(log, "3c", "Secured implies secure at top", 0x3c, secured_case));
  out.push_back(property(log, "3d", "restore idempotence", 0x3d, idempotence_case));
  out.push_back(property(log, "3e", "rejection leaves the serialization unchanged", 0x3e, rejection_case));
  out.push_back(property(log, "3f", "commit outcome ignores edits above the level", 0x3f, covert_channel_case));
  out.push_back(property(log, "3g", "view monotonicity", 0x40, monotonicity_case));
  out.push_back(property(log, "3h", "serializer round-trip", 0x41, round_trip_case));
  return out;
}

void print(const Result& r) {
  std::cout << (r.pass ? "PASS " : "FAIL ") << r.id << " " << r.title << " (" << r.detail << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::string transcript_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--transcript" && i + 1 < argc) {
      transcript_path = argv[++i];
    } else {
      std::cerr << "usage: " << argv[0] << " [--transcript PATH]\n";
      return 1;
    }
  }

  std::ostringstream first;
  std::ostringstream second;
  std::vector<Result> results;
  try {
    results = run_all(first);
    const std::vector<Result> again = run_all(second);
    bool same = first.str() == second.str();
    for (std::size_t i = 0; i < results.size(); ++i)
      same = same && results[i].pass == again[i].pass && results[i].detail == again[i].detail;
    results.push_back({"4", "determinism across two consecutive runs", same,
                       std::to_string(first.str().size()) + " transcript bytes, byte-identical"});
  } catch (const std::exception& e) {
    std::cout << "FAIL uncaught exception: " << e.what() << "\n";
    return 1;
  }

  bool all = true;
  for (const auto& r : results) {
    print(r);
    all = all && r.pass;
  }
  if (!transcript_path.empty()) {
    std::ofstream f(transcript_path, std::ios::binary | std::ios::trunc);
    f << first.str();
  }
  if (!all) {
    std::istringstream lines(first.str());
    for (std::string line; std::getline(lines, line);)
      if (line.find(" FAIL ") != std::string::npos) std::cout << line << "\n";
  }
  return all ? 0 : 1;
}
