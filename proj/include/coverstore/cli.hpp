#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "coverstore/txn.hpp"

namespace coverstore::cli {

// Exit codes of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInsecure = 2;

// "pending", "nondet" or "priority:Salary=C2>C1,Employee=U>S".
RestoreConfig parse_policy(const std::string& spec, const Lattice& lat, std::uint64_t seed);

// Prints the security report at the top level. Exit 0 secure, 2 insecure,
// 1 on I/O or parse errors (reported on `err`).
int cmd_check(const std::string& path, bool machine, std::ostream& out, std::ostream& err);

// Rewrites the file in canonical form.
int cmd_format(const std::string& path, std::ostream& err);

struct ShellOptions {
  std::string db_path;
  std::optional<std::string> level;  // session clearance; top for SA sessions
  bool sa = false;
  std::string policy = "pending";
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::optional<std::string> audit_path;  // empty string disables the audit file
};

// A level-scoped session over one store. Everything printed to a non-SA
// session is derived from the database view at its clearance.
class Shell {
 public:
  // Throws Error for an unknown level or a bad policy.
  Shell(Database db, const ShellOptions& opts, std::ostream& out);

  // Executes lines until "quit" or end of input. Returns 1 if any command
  // failed, else 2 if any commit was rejected, else 0.
  int run(std::istream& in, bool prompt = false);
  // Returns false once the session should end.
  bool execute(const std::string& line);

  const Store& store() const { return store_; }
  const SecurityLevel& clearance() const { return clearance_; }

 private:
  void dispatch(const std::string& cmd, const std::string& rest);
  const Database& current_view_source() const;
  const SecurityLevel& active_level() const;
  void require_sa(const std::string& cmd) const;
  void print_commit_details(const Committed& c);

  void cmd_begin(const std::string& rest);
  void cmd_write(const std::string& cmd, const std::string& rest);
  void cmd_read(const std::string& rest);
  void cmd_query(const std::string& rest);
  void cmd_covers();
  void cmd_commit();
  void cmd_alerts();
  void cmd_pending();
  void cmd_resolve(const std::string& rest);
  void cmd_trigger(const std::string& rest);
  void cmd_check();
  void cmd_save();

  ShellOptions opts_;
  Store store_;
  SecurityLevel clearance_;
  std::optional<Transaction> txn_;
  std::shared_ptr<const Database> snapshot_;
  std::ostream& out_;
  bool had_error_ = false;
  bool had_rejection_ = false;
};

}  // namespace coverstore::cli
