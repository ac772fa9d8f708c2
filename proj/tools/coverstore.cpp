#include <unistd.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "coverstore/cli.hpp"
#include "coverstore/error.hpp"
#include "coverstore/lang.hpp"

namespace cli = coverstore::cli;

int main(int argc, char** argv) {
  CLI::App app{"coverstore: multilevel-secure datastore with explicit cover stories"};
  app.require_subcommand(1);

  std::string check_path;
  bool machine = false;
  auto* check = app.add_subcommand("check", "report security at the top level (exit 0 secure, 2 insecure)");
  check->add_option("file", check_path, "database file")->required();
  check->add_flag("--machine", machine, "one finding per line");

  cli::ShellOptions shell_opts;
  std::string level;
  std::string audit;
  auto* shell = app.add_subcommand("shell", "interactive session at one clearance level");
  shell->add_option("file", shell_opts.db_path, "database file")->required();
  shell->add_option("--level", level, "session clearance");
  shell->add_flag("--sa", shell_opts.sa, "security administrator session (top clearance, trusted path)");
  shell->add_option("--seed", shell_opts.seed, "seed for the nondet policy");
  shell->add_option("--policy", shell_opts.policy, "pending | nondet | priority:Pred=L1>L2,...");
  shell->add_flag("--deterministic", shell_opts.deterministic, "no timestamps in alerts");
  shell->add_option("--audit", audit, "audit log file (default <file>.audit)");

  std::string format_path;
  auto* format = app.add_subcommand("format", "rewrite a database file in canonical form");
  format->add_option("file", format_path, "database file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kExitOk : cli::kExitError;
  }

  if (*check) return cli::cmd_check(check_path, machine, std::cout, std::cerr);
  if (*format) return cli::cmd_format(format_path, std::cerr);

  if (level.empty() && !shell_opts.sa) {
    std::cerr << "shell: --level is required unless --sa is given\n";
    return cli::kExitError;
  }
  if (!level.empty()) shell_opts.level = level;
  if (shell->count("--audit") > 0) shell_opts.audit_path = audit;
  try {
    std::ifstream f(shell_opts.db_path, std::ios::binary);
    if (!f) throw coverstore::Error(coverstore::ErrorCode::kInvalidConfig, "cannot read " + shell_opts.db_path);
    std::ostringstream text;
    text << f.rdbuf();
    cli::Shell session(coverstore::parse_database(text.str()), shell_opts, std::cout);
    return session.run(std::cin, isatty(STDIN_FILENO) != 0);
  } catch (const coverstore::Error& e) {
    std::cerr << shell_opts.db_path << ": " << e.what() << "\n";
    return cli::kExitError;
  }
}
