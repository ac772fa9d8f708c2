#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include "coverstore/cli.hpp"
#include "coverstore/error.hpp"

namespace coverstore::cli {

namespace {

std::string trim(const std::string& s) {
  auto b = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  auto e = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return b < e ? std::string(b, e) : std::string();
}

// Splits "a; b; c" on top-level semicolons.
std::vector<std::string> split_changes(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ';') {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

const char* kHelp =
    "commands:\n"
    "  begin [LEVEL]                 open a transaction (default: session level)\n"
    "  insert <entry>                a bare atom is a fact: insert Employee(Durand)\n"
    "  delete <entry>\n"
    "  update [fact [L]] A -> B      replace a fact\n"
    "  read <pattern>                classified entries matching, e.g. Salary(Dupont, ?)\n"
    "  query <pattern>               facts of the real world at this level\n"
    "  covers                        cover stories visible at this level\n"
    "  commit | rollback\n"
    "  check                         security report at this level\n"
    "  pending                       open cover-story disjunctions visible here\n"
    "  alerts                        SA alerts (SA only)\n"
    "  resolve <id> choose <k>       SA: take option k as the cover story\n"
    "  resolve <id> do <change>; ... SA: apply trusted changes instead\n"
    "  trigger <cover decl>          SA: set the update trigger on a cover story\n"
    "  save                          write the database file\n"
    "  quit\n";

RestoreConfig config_for(const Database& db, const ShellOptions& opts) {
  return parse_policy(opts.policy, db.lattice(), opts.seed);
}

}  // namespace

Shell::Shell(Database db, const ShellOptions& opts, std::ostream& out)
    : opts_(opts),
      store_(db, config_for(db, opts), opts.deterministic),
      clearance_(opts.sa || !opts.level ? db.lattice().top() : SecurityLevel(*opts.level)),
      out_(out) {
  db.lattice().require(clearance_);
  if (opts_.sa && opts_.level && SecurityLevel(*opts_.level) != clearance_) {
    throw Error(ErrorCode::kInvalidConfig, "an SA session runs at the top level " + clearance_.name);
  }
  std::string audit_path = opts_.audit_path.value_or(opts_.db_path.empty() ? "" : opts_.db_path + ".audit");
  if (!audit_path.empty()) {
    store_.admin().set_audit_sink([audit_path](const std::string& line) {
      std::ofstream f(audit_path, std::ios::app);
      f << line << '\n';
    });
  }
  snapshot_ = store_.snapshot();
}

int Shell::run(std::istream& in, bool prompt) {
  std::string line;
  while (true) {
    if (prompt) out_ << clearance_.name << (txn_ ? "*" : "") << "> " << std::flush;
    if (!std::getline(in, line)) break;
    if (!execute(line)) break;
  }
  if (had_error_) return kExitError;
  return had_rejection_ ? kExitInsecure : kExitOk;
}

bool Shell::execute(const std::string& raw) {
  std::string line = trim(raw);
  if (line.empty() || line[0] == '#') return true;
  const auto space = line.find_first_of(" \t");
  const std::string cmd = line.substr(0, space);
  const std::string rest = space == std::string::npos ? "" : trim(line.substr(space));
  if (cmd == "quit" || cmd == "exit") return false;
  try {
    dispatch(cmd, rest);
  } catch (const Error& e) {
    out_ << "error: " << e.what() << "\n";
    had_error_ = true;
  }
  snapshot_ = store_.snapshot();
  return true;
}

void Shell::dispatch(const std::string& cmd, const std::string& rest) {
  if (cmd == "help") {
    out_ << kHelp;
  } else if (cmd == "begin") {
    cmd_begin(rest);
  } else if (cmd == "insert" || cmd == "delete" || cmd == "update") {
    cmd_write(cmd, rest);
  } else if (cmd == "read") {
    cmd_read(rest);
  } else if (cmd == "query") {
    cmd_query(rest);
  } else if (cmd == "covers") {
    cmd_covers();
  } else if (cmd == "commit") {
    cmd_commit();
  } else if (cmd == "rollback") {
    if (!txn_) throw Error(ErrorCode::kNoTransaction, "no open transaction");
    txn_.reset();
    out_ << "rolled back\n";
  } else if (cmd == "alerts") {
    cmd_alerts();
  } else if (cmd == "pending") {
    cmd_pending();
  } else if (cmd == "resolve") {
    cmd_resolve(rest);
  } else if (cmd == "trigger") {
    cmd_trigger(rest);
  } else if (cmd == "check") {
    cmd_check();
  } else if (cmd == "save") {
    cmd_save();
  } else {
    throw Error(ErrorCode::kSyntaxError, "unknown command '" + cmd + "' (try help)");
  }
}

const Database& Shell::current_view_source() const { return txn_ ? txn_->working() : *snapshot_; }

const SecurityLevel& Shell::active_level() const { return txn_ ? txn_->level() : clearance_; }

void Shell::require_sa(const std::string& cmd) const {
  if (!opts_.sa) throw Error(ErrorCode::kNotTrusted, cmd + " needs an SA session (--sa)");
}

void Shell::cmd_begin(const std::string& rest) {
  if (txn_) throw Error(ErrorCode::kSemanticError, "a transaction is already open at " + txn_->level().name);
  SecurityLevel level = rest.empty() ? clearance_ : SecurityLevel(rest);
  txn_.emplace(store_.begin(level, clearance_));
  out_ << "begin at " << level.name << "\n";
}

void Shell::cmd_write(const std::string& cmd, const std::string& rest) {
  if (!txn_) throw Error(ErrorCode::kNoTransaction, "no open transaction (use begin)");
  // A bare atom is a fact.
  const bool bare = !rest.empty() && std::isupper(static_cast<unsigned char>(rest[0]));
  Change change = parse_change(cmd + (bare ? " fact " : " ") + rest, snapshot_->lattice(), txn_->level());
  txn_write(*txn_, change);
  out_ << "ok\n";
}

void Shell::cmd_read(const std::string& rest) {
  const AtomQuery q = parse_query(rest);
  std::optional<Transaction> scratch;
  if (!txn_) scratch.emplace(store_.begin(clearance_, clearance_));
  const ReadResult r = txn_read(txn_ ? *txn_ : *scratch, q);
  for (const auto& f : r.facts) out_ << to_string(f) << "\n";
  for (const auto& c : r.constraints) out_ << to_string(c) << "\n";
  for (const auto& d : r.covers) out_ << to_string(d) << "\n";
}

void Shell::cmd_query(const std::string& rest) {
  const AtomQuery q = parse_query(rest);
  const RealWorld world = real_world(view_at(current_view_source(), active_level()));
  for (const auto& a : world.facts)
    if (q.matches(a)) out_ << to_string(a) << "\n";
}

void Shell::cmd_covers() {
  const Database view = view_at(current_view_source(), active_level());
  for (const auto& d : view.cover_constraints()) out_ << to_string(d) << "\n";
  for (const auto& d : view.cover_facts()) out_ << to_string(d) << "\n";
}

void Shell::cmd_commit() {
  if (!txn_) throw Error(ErrorCode::kNoTransaction, "no open transaction");
  CommitOutcome outcome = store_.commit(*txn_);
  txn_.reset();
  if (const auto* rejected = std::get_if<Rejected>(&outcome)) {
    out_ << "rejected\n" << render_human(rejected->report);
    had_rejection_ = true;
    return;
  }
  out_ << "committed\n";
  if (opts_.sa) print_commit_details(std::get<Committed>(outcome));
}

void Shell::print_commit_details(const Committed& c) {
  for (const auto& d : c.trigger_inserts) out_ << "trigger: insert " << to_string(d) << "\n";
  if (c.global_secure) {
    out_ << "global: secure\n";
    return;
  }
  out_ << "global: insecure (alert " << *c.alert_id << ")\n";
  if (!c.restore) return;
  for (const auto& a : c.restore->actions) out_ << "action: " << to_string(a) << "\n";
  if (c.restore->status == RestoreOutcome::Status::kSecured) {
    out_ << "restored: secure\n";
  } else {
    out_ << "restored: pending\n";
    cmd_pending();
  }
}

void Shell::cmd_alerts() {
  if (clearance_ != snapshot_->lattice().top()) {
    throw Error(ErrorCode::kNotTrusted, "alerts are visible at " + snapshot_->lattice().top().name + " only");
  }
  for (const auto& a : store_.admin().alerts()) {
    out_ << "ALERT " << a.id << " " << alert_kind_name(a.kind) << (a.resolved ? " resolved" : " open") << " | "
         << a.detail << "\n";
  }
}

void Shell::cmd_pending() {
  for (const auto& p : store_.admin().visible_pending(snapshot_->lattice(), clearance_)) {
    out_ << "PENDING " << p.id << " " << p.disjunction.level.name << " | " << to_string(p.disjunction) << "\n";
    for (std::size_t i = 0; i < p.disjunction.disjuncts.size(); ++i) {
      out_ << "  " << i + 1 << ". " << to_string(p.disjunction.disjuncts[i]) << "\n";
    }
  }
}

void Shell::cmd_resolve(const std::string& rest) {
  require_sa("resolve");
  std::istringstream in(rest);
  std::uint64_t id = 0;
  std::string verb;
  if (!(in >> id >> verb) || (verb != "choose" && verb != "do")) {
    throw Error(ErrorCode::kSyntaxError, "usage: resolve <id> choose <k> | resolve <id> do <change>; ...");
  }
  std::string tail;
  std::getline(in, tail);
  SaChoice choice;
  if (verb == "choose") {
    std::size_t k = 0;
    std::istringstream num(tail);
    if (!(num >> k) || k == 0) throw Error(ErrorCode::kInvalidChoice, "options are numbered from 1");
    choice = k - 1;
  } else {
    ExternalAction action;
    for (const auto& text : split_changes(tail)) {
      action.changes.push_back(parse_change(text, snapshot_->lattice()));
    }
    if (action.changes.empty()) throw Error(ErrorCode::kSyntaxError, "resolve ... do needs at least one change");
    choice = std::move(action);
  }
  const Database db = sa_resolve(store_, id, choice);
  out_ << "resolved " << id << "\n";
  out_ << (is_secure(db, db.lattice().top()).secure ? "global: secure\n" : "global: insecure\n");
}

void Shell::cmd_trigger(const std::string& rest) {
  require_sa("trigger");
  Entry e = parse_entry(rest, snapshot_->lattice());
  const auto* decl = std::get_if<CoverStoryDecl>(&e);
  if (!decl) throw Error(ErrorCode::kSyntaxError, "trigger needs a cover declaration");
  register_trigger(store_, *decl);
  out_ << "trigger set\n";
}

void Shell::cmd_check() {
  out_ << render_human(is_secure(view_at(*snapshot_, clearance_), clearance_));
}

void Shell::cmd_save() {
  if (opts_.db_path.empty()) throw Error(ErrorCode::kInvalidConfig, "no database file");
  std::ofstream f(opts_.db_path, std::ios::trunc);
  f << serialize(*store_.snapshot());
  if (!f) throw Error(ErrorCode::kInvalidConfig, "cannot write " + opts_.db_path);
  out_ << "saved\n";
}

}  // namespace coverstore::cli
