#include "fictifem/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fictifem {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError("expected a number, got '" + v + "'");
  return d;
}

int to_int(const std::string& v) {
  int i = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("expected an integer, got '" + v + "'");
  return i;
}

bool to_bool(const std::string& v) {
  const std::string s = lower(v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

void apply(Config& cfg, const std::string& section, const std::string& key, const std::string& value) {
  if (section == "problem") {
    if (key == "element") return void(cfg.problem.element = parse_element_pair(value));
    if (key == "level1") return void(cfg.problem.level1 = to_int(value));
    if (key == "level2") return void(cfg.problem.level2 = to_int(value));
    if (key == "mode") return void(cfg.problem.mode = parse_coefficient_mode(value));
  } else if (section == "adapt") {
    if (key == "alpha1") return void(cfg.adapt.alpha1 = to_double(value));
    if (key == "alpha2") return void(cfg.adapt.alpha2 = to_double(value));
    if (key == "tol") return void(cfg.adapt.tol = to_double(value));
    if (key == "max_cycles") return void(cfg.adapt.max_cycles = to_int(value));
    if (key == "max_dofs") return void(cfg.adapt.max_dofs = to_int(value));
    if (key == "marking") return void(cfg.adapt.marking = parse_marking_criterion(value));
  } else if (section == "solver") {
    if (key == "method") return void(cfg.solver.method = parse_solver_method(value));
    if (key == "gmres_rel_tol") return void(cfg.solver.gmres_rel_tol = to_double(value));
    if (key == "restart") return void(cfg.solver.restart = to_int(value));
    if (key == "max_iters") return void(cfg.solver.max_iters = to_int(value));
    if (key == "schur_scaling") return void(cfg.solver.schur_scaling = to_double(value));
  } else if (section == "output") {
    if (key == "directory") return void(cfg.output.directory = value);
    if (key == "csv") return void(cfg.output.csv = to_bool(value));
    if (key == "vtk") return void(cfg.output.vtk = to_bool(value));
    if (key == "summary") return void(cfg.output.summary = to_bool(value));
    if (key == "matrix_market") return void(cfg.output.matrix_market = to_bool(value));
  } else if (section.empty()) {
    throw ConfigError("key '" + key + "' appears before any [section]");
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
  throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
}

}  // namespace

Config parse_config(std::string_view text, const std::string& source) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string raw, section;
  int line_no = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section != "problem" && section != "adapt" && section != "solver" && section != "output") {
        fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");
    if (value.empty()) fail("missing value for '" + key + "'");
    try {
      apply(cfg, section, key, value);
      cfg.adapt.validate();
      cfg.solver.validate();
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }
  try {
    cfg.adapt.validate();
    cfg.solver.validate();
    for (const auto& level : {cfg.problem.level1, cfg.problem.level2}) {
      if (level && (*level < 0 || *level > 12)) throw ConfigError("levels must lie in [0, 12]");
    }
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

}  // namespace fictifem
