#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "sfem/afem.hpp"

namespace sfem {

// Thrown on malformed or inconsistent configuration text. The message names
// the offending line when the problem is tied to one.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A full experiment description as read from a key=value file. Field names
// match the accepted keys one to one.
struct RunConfig {
  std::string problem;  // required; see problem_by_name for accepted values
  std::string estimator = "jacobi";
  std::string norm = "h1_semi";  // energy | h1_semi | l2
  std::string variant = "red";   // red | degree_raise
  int q = 2;                     // auxiliary degree for degree_raise / implicit_patch
  int degree = 1;
  double theta = 0.5;
  int max_dofs = 10000;
  std::string output = "out";
  std::uint64_t seed = 1;  // drives the contraction-factor probes
  bool timing = false;     // when false, recorded seconds are 0 for reproducible output
  double tol = 1e-12;
};

// Parses `key = value` text, one pair per line, with `#` starting a comment
// and blank lines ignored. Unknown keys, duplicate keys, malformed values,
// out-of-range values, invalid enum members, and a missing `problem` key all
// raise config_error. Keys the text omits keep their defaults, except `norm`,
// whose default follows the estimator (residual_l2 measures in L2).
RunConfig parse_config(const std::string& text);

// Canonical textual form: every key on its own line, fixed key order,
// doubles at 17 significant digits. parse_config(serialize_config(c))
// reproduces c exactly.
std::string serialize_config(const RunConfig& config);

// True when `estimator` can report in `norm`. The Jacobi pairing is the only
// estimator with a native energy reading; the residual estimators are bound
// to the norm they were derived in.
bool norm_allowed(const std::string& estimator, const std::string& norm);

// The norm an estimator reports in when the configuration does not pick one.
std::string default_norm(const std::string& estimator);

// The subset of the configuration the adaptive loop consumes.
AfemConfig afem_config(const RunConfig& config);

}  // namespace sfem
