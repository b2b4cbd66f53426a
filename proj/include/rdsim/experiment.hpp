#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rdsim/flows.hpp"

namespace rdsim {

inline constexpr const char* kArtifactVersion = "1.0.0";

// Exit codes of the command line tool.
inline constexpr int kExitPass = 0;
inline constexpr int kExitAssertion = 2;
inline constexpr int kExitConfig = 3;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string subcommand;
  double lambda = 1.0;
  int dim = 1;
  int n = 8;
  std::vector<int> ns;    // n grid (bg, conc replacement)
  int lmin = 2;           // flows: powers of two in [lmin, lmax]
  int lmax = 256;
  std::vector<int> ells;  // conc replacement
  double rho = -1.0;      // < 0: stationary root
  double T = 1.0;
  int samples = 50;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  std::vector<int> modes{1};
  std::string kind = "martingale";  // fluct: martingale | qv | ou | covariance
  std::string suite = "all";        // conc
  bool verify = true;               // flows: rational divergence audit
  std::string out;                  // CSV path; empty: stdout
  std::string json;                 // verdict path; empty: stderr
  std::string event_log;            // simulate: event log path

  bool operator==(const ExperimentConfig&) const = default;
};

// 17 significant digits.
[[nodiscard]] std::string format_double(double v);

// Ordered (key, value) pairs of every config field except output paths.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);

// Header block: "# key = value" lines with the artifact version, schema
// and config echo.
void write_header(std::ostream& out, const ExperimentConfig& cfg, const std::string& schema);

// Reads the leading '#' block written by write_header; output paths are left
// empty.  Throws ConfigError on malformed entries.
[[nodiscard]] ExperimentConfig parse_header(std::istream& in);

// Throws ConfigError on out-of-range parameters.
void validate(const ExperimentConfig& cfg);

[[nodiscard]] double effective_density(const ExperimentConfig& cfg);

struct RunOutcome {
  bool passed = false;
  nlohmann::json verdict;
};

// Runs the subcommand, writing header and CSV body to csv.
[[nodiscard]] RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& csv);

// Flow cost scaling verdict over the rows of one dimension: d = 1 cost / l
// within 5% of 1/3 for l >= 64; d = 2 cost / log l spread < 25% for l >= 16;
// d = 3 cost growth < 10% from l = 16 to the largest l; all divergences exact
// when audited.
[[nodiscard]] nlohmann::json flow_scaling_verdict(const std::vector<CostRow>& rows, int dim, bool audited);

// Adjoint comparison as JSON (d = 1).
[[nodiscard]] nlohmann::json adjoint_comparison_json(double lambda, int n);

}  // namespace rdsim
