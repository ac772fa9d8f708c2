#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "coverstore/lang.hpp"
#include "coverstore/model.hpp"

namespace coverstore::testing {

inline std::string data_path(const std::string& name) { return std::string(COVERSTORE_TEST_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string& name) {
  std::ifstream f(data_path(name), std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

inline Database load(const std::string& name) { return parse_database(read_text(name)); }

inline Atom atom(const std::string& text) { return parse_atom(text); }

inline ClassifiedFact fact(const std::string& text, const Lattice& lat) {
  return std::get<ClassifiedFact>(parse_entry(text, lat));
}

inline CoverStoryDecl cover(const std::string& text, const Lattice& lat) {
  return std::get<CoverStoryDecl>(parse_entry(text, lat));
}

inline Formula formula(const std::string& text) { return canonical(parse_formula(text)); }

inline Change change(const std::string& text, const Lattice& lat) { return parse_change(text, lat); }

inline SecurityLevel L(const std::string& name) { return SecurityLevel(name); }

}  // namespace coverstore::testing
