#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace hps::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 2, kNumericFailure = 3 };

struct RunConfig {
  std::string mode = "solve";  // solve, sweep, bench, timestep, oracle-check
  std::string problem = "poisson_green";
  double kappa = 16.0;
  double amplitude = 0.25;
  double frequency = 6.0;
  std::size_t dim = 3;
  std::vector<double> domain_lo, domain_hi;  // empty: problem default
  std::vector<std::size_t> boxes = {2};      // one entry per axis, or a uniform count
  std::vector<std::size_t> p = {8};
  std::string corner_mode = "auto";
  std::string ordering = "min-degree";
  std::size_t workers = 1;
  std::size_t batch_size = 4;
  std::size_t resident_limit = 16;
  std::size_t memory_budget = std::size_t{2} << 30;
  bool cache_leaves = false;
  std::string out = "hps_out";
  bool oracle = false;
  bool nodes = false;
  double dt = 0.1;
  std::size_t steps = 10;
  std::size_t snapshot_stride = 0;
  std::size_t dt_halvings = 0;
  std::size_t trials = 3;
  std::size_t reference_p_offset = 6;
};

struct ConfigEntry {
  std::string key;  // long flag name without dashes
  std::string value;
  std::size_t line;
};

// Parses a flat "key = value" file. Keys are the long flag names (dashes or
// underscores); '#' starts a comment. Errors name the file and line.
std::vector<ConfigEntry> read_config_file(const std::string& path);

// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Runs a validated configuration. Throws ConfigError or NumericError.
int run_config(const RunConfig& cfg, std::ostream& out);

}  // namespace hps::cli
