#include <fstream>
#include <iostream>
#include <sstream>

#include "coverstore/cli.hpp"
#include "coverstore/error.hpp"

namespace coverstore::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidConfig, "cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) out.push_back(part);
  return out;
}

}  // namespace

RestoreConfig parse_policy(const std::string& spec, const Lattice& lat, std::uint64_t seed) {
  RestoreConfig cfg;
  cfg.seed = seed;
  if (spec == "pending") return cfg;
  if (spec == "nondet") {
    cfg.policy = RestoreConfig::Policy::kNonDeterministic;
    return cfg;
  }
  const std::string prefix = "priority:";
  if (spec.rfind(prefix, 0) != 0) {
    throw Error(ErrorCode::kInvalidConfig, "unknown policy '" + spec + "' (pending, nondet or priority:<spec>)");
  }
  cfg.policy = RestoreConfig::Policy::kLevelPriority;
  for (const auto& item : split(spec.substr(prefix.size()), ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kInvalidConfig, "priority entries look like Predicate=L1>L2, got '" + item + "'");
    }
    std::vector<SecurityLevel> order;
    for (const auto& name : split(item.substr(eq + 1), '>')) {
      SecurityLevel l(name);
      lat.require(l);
      order.push_back(std::move(l));
    }
    if (order.empty()) throw Error(ErrorCode::kInvalidConfig, "empty priority list in '" + item + "'");
    cfg.priority[item.substr(0, eq)] = std::move(order);
  }
  return cfg;
}

int cmd_check(const std::string& path, bool machine, std::ostream& out, std::ostream& err) {
  try {
    const Database db = parse_database(read_file(path));
    const SecurityReport r = is_secure(db, db.lattice().top());
    out << (machine ? render_machine(r) : render_human(r));
    return r.secure ? kExitOk : kExitInsecure;
  } catch (const Error& e) {
    err << path << ": " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_format(const std::string& path, std::ostream& err) {
  try {
    const std::string text = serialize(parse_database(read_file(path)));
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Error(ErrorCode::kInvalidConfig, "cannot write " + path);
    return kExitOk;
  } catch (const Error& e) {
    err << path << ": " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace coverstore::cli
