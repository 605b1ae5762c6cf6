#include "sfem/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace sfem {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw config_error("config line " + std::to_string(line) + ": " + what);
}

int parse_int(int line, const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    fail(line, key + " expects an integer, got '" + value + "'");
  }
  if (v < -2147483647L || v > 2147483647L) fail(line, key + " out of range");
  return static_cast<int>(v);
}

std::uint64_t parse_u64(int line, const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0' || value[0] == '-') {
    fail(line, key + " expects a non-negative integer, got '" + value + "'");
  }
  return static_cast<std::uint64_t>(v);
}

double parse_double(int line, const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    fail(line, key + " expects a number, got '" + value + "'");
  }
  return v;
}

bool parse_bool(int line, const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  fail(line, key + " expects true/false, got '" + value + "'");
}

const std::set<std::string> kEstimators = {"jacobi", "gauss_seidel", "implicit_patch",
                                           "residual_h1", "residual_l2"};
const std::set<std::string> kNorms = {"energy", "h1_semi", "l2"};
const std::set<std::string> kVariants = {"red", "degree_raise"};
const std::set<std::string> kProblems = {"poisson_lshape", "poisson_square_smooth",
                                         "convection_diffusion_interface"};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool norm_allowed(const std::string& estimator, const std::string& norm) {
  if (estimator == "jacobi") return kNorms.count(norm) > 0;
  if (estimator == "gauss_seidel") return norm == "h1_semi" || norm == "l2";
  if (estimator == "implicit_patch") return norm == "h1_semi";
  if (estimator == "residual_h1") return norm == "h1_semi";
  if (estimator == "residual_l2") return norm == "l2";
  return false;
}

std::string default_norm(const std::string& estimator) {
  return estimator == "residual_l2" ? "l2" : "h1_semi";
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, int> seen;  // key -> first line, for duplicate reports
  bool norm_given = false;
  int norm_line = 0;
  int q_line = 0;
  bool q_given = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value, got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (value.empty()) fail(line, "empty value for key '" + key + "'");
    const auto dup = seen.find(key);
    if (dup != seen.end()) {
      fail(line, "duplicate key '" + key + "' (first set on line " +
                     std::to_string(dup->second) + ")");
    }
    seen[key] = line;

    if (key == "problem") {
      if (kProblems.count(value) == 0) fail(line, "unknown problem '" + value + "'");
      c.problem = value;
    } else if (key == "estimator") {
      if (kEstimators.count(value) == 0) fail(line, "unknown estimator '" + value + "'");
      c.estimator = value;
    } else if (key == "norm") {
      if (kNorms.count(value) == 0) fail(line, "unknown norm '" + value + "'");
      c.norm = value;
      norm_given = true;
      norm_line = line;
    } else if (key == "variant") {
      if (kVariants.count(value) == 0) fail(line, "unknown variant '" + value + "'");
      c.variant = value;
    } else if (key == "q") {
      c.q = parse_int(line, key, value);
      if (c.q < 1) fail(line, "q must be at least 1");
      q_given = true;
      q_line = line;
    } else if (key == "degree") {
      c.degree = parse_int(line, key, value);
      if (c.degree < 1) fail(line, "degree must be at least 1");
    } else if (key == "theta") {
      c.theta = parse_double(line, key, value);
      if (!(c.theta > 0.0 && c.theta <= 1.0)) fail(line, "theta must lie in (0, 1]");
    } else if (key == "max_dofs") {
      c.max_dofs = parse_int(line, key, value);
      if (c.max_dofs < 1) fail(line, "max_dofs must be positive");
    } else if (key == "output") {
      c.output = value;
    } else if (key == "seed") {
      c.seed = parse_u64(line, key, value);
    } else if (key == "timing") {
      c.timing = parse_bool(line, key, value);
    } else if (key == "tol") {
      c.tol = parse_double(line, key, value);
      if (!(c.tol > 0.0)) fail(line, "tol must be positive");
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }

  if (c.problem.empty()) {
    throw config_error("config: missing required key 'problem'");
  }
  if (!norm_given) c.norm = default_norm(c.estimator);
  if (!q_given) c.q = std::max(2, c.degree + 1);

  if (!norm_allowed(c.estimator, c.norm)) {
    const std::string where =
        norm_given ? "config line " + std::to_string(norm_line) + ": " : "config: ";
    throw config_error(where + "estimator '" + c.estimator + "' cannot report in norm '" +
                       c.norm + "'");
  }
  const bool needs_high_degree =
      c.estimator == "implicit_patch" ||
      ((c.estimator == "jacobi" || c.estimator == "gauss_seidel") && c.variant == "degree_raise");
  if (needs_high_degree && c.q <= c.degree) {
    const std::string where =
        q_given ? "config line " + std::to_string(q_line) + ": " : "config: ";
    throw config_error(where + "q must exceed degree (" + std::to_string(c.degree) +
                       ") for estimator '" + c.estimator + "' with variant '" + c.variant + "'");
  }
  return c;
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  out << "problem = " << config.problem << "\n";
  out << "estimator = " << config.estimator << "\n";
  out << "norm = " << config.norm << "\n";
  out << "variant = " << config.variant << "\n";
  out << "q = " << config.q << "\n";
  out << "degree = " << config.degree << "\n";
  out << "theta = " << format_double(config.theta) << "\n";
  out << "max_dofs = " << config.max_dofs << "\n";
  out << "output = " << config.output << "\n";
  out << "seed = " << config.seed << "\n";
  out << "timing = " << (config.timing ? "true" : "false") << "\n";
  out << "tol = " << format_double(config.tol) << "\n";
  return out.str();
}

AfemConfig afem_config(const RunConfig& config) {
  AfemConfig a;
  a.degree = config.degree;
  a.theta = config.theta;
  a.max_dofs = config.max_dofs;
  a.estimator = config.estimator;
  a.norm = config.norm;
  a.variant = config.variant;
  a.q = config.q;
  a.solver_tol = config.tol;
  a.timing = config.timing;
  return a;
}

}  // namespace sfem
