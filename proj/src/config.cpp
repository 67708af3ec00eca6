#include "uzawa/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "uzawa/io.hpp"

namespace uzawa {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class Int>
Int parse_integer(const std::string& s) {
  Int x{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ValidationError("not an integer: '" + s + "'");
  return x;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError("not a boolean: '" + s + "'");
}

using Setter = std::function<void(AlgorithmConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m = {
      {"kappa1", [](AlgorithmConfig& c, const std::string& v) { c.kappa1 = parse_double(v); }},
      {"kappa2", [](AlgorithmConfig& c, const std::string& v) { c.kappa2 = parse_double(v); }},
      {"kappa3", [](AlgorithmConfig& c, const std::string& v) { c.kappa3 = parse_double(v); }},
      {"vartheta", [](AlgorithmConfig& c, const std::string& v) { c.vartheta = parse_double(v); }},
      {"theta", [](AlgorithmConfig& c, const std::string& v) { c.theta = parse_double(v); }},
      {"c_mark", [](AlgorithmConfig& c, const std::string& v) { c.c_mark = parse_double(v); }},
      {"solver", [](AlgorithmConfig& c, const std::string& v) { c.solver = parse_solver_mode(v); }},
      {"quad_order", [](AlgorithmConfig& c, const std::string& v) { c.quad_order = parse_integer<int>(v); }},
      {"mu_tol", [](AlgorithmConfig& c, const std::string& v) { c.mu_tol = parse_double(v); }},
      {"max_elements",
       [](AlgorithmConfig& c, const std::string& v) { c.max_elements = parse_integer<std::size_t>(v); }},
      {"max_steps", [](AlgorithmConfig& c, const std::string& v) { c.max_steps = parse_integer<int>(v); }},
      {"problem", [](AlgorithmConfig& c, const std::string& v) { c.problem = v; }},
      {"domain", [](AlgorithmConfig& c, const std::string& v) { c.domain = v; }},
      {"refinement", [](AlgorithmConfig& c, const std::string& v) { c.refinement = parse_refinement_mode(v); }},
      {"seed", [](AlgorithmConfig& c, const std::string& v) { c.seed = parse_integer<std::uint64_t>(v); }},
      {"pcg_max_iter", [](AlgorithmConfig& c, const std::string& v) { c.pcg_max_iter = parse_integer<int>(v); }},
      {"check_invariants",
       [](AlgorithmConfig& c, const std::string& v) { c.check_invariants = parse_bool(v); }},
  };
  return m;
}

}  // namespace

AlgorithmConfig parse_config(std::istream& is, AlgorithmConfig base) {
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ValidationError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ValidationError(where + "duplicate key '" + key + "'");
    if (value.empty()) throw ValidationError(where + "missing value for '" + key + "'");
    try {
      it->second(base, value);
    } catch (const std::exception& e) {
      throw ValidationError(where + key + ": " + e.what());
    }
  }
  return base;
}

AlgorithmConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  return parse_config(in);
}

std::vector<std::pair<std::string, std::string>> config_entries(const AlgorithmConfig& c) {
  return {
      {"kappa1", format_double(c.kappa1)},
      {"kappa2", format_double(c.kappa2)},
      {"kappa3", format_double(c.kappa3)},
      {"vartheta", format_double(c.vartheta)},
      {"theta", format_double(c.theta)},
      {"c_mark", format_double(c.c_mark)},
      {"solver", to_string(c.solver)},
      {"quad_order", std::to_string(c.quad_order)},
      {"mu_tol", format_double(c.mu_tol)},
      {"max_elements", std::to_string(c.max_elements)},
      {"max_steps", std::to_string(c.max_steps)},
      {"problem", c.problem},
      {"domain", c.domain},
      {"refinement", to_string(c.refinement)},
      {"seed", std::to_string(c.seed)},
      {"pcg_max_iter", std::to_string(c.pcg_max_iter)},
      {"check_invariants", c.check_invariants ? "true" : "false"},
  };
}

void write_config(std::ostream& os, const AlgorithmConfig& c) {
  for (const auto& [k, v] : config_entries(c))
    if (!v.empty()) os << k << " = " << v << '\n';
}

}  // namespace uzawa
