#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bam/driver.hpp"
#include "bam/problem.hpp"

namespace bam::experiment {

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitCheckFailed = 2 };

struct FaultSpec {
  std::size_t block = 0;
  Eigen::Index index = 0;
  double delta = 0.1;
};

struct ProblemSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 7;
  std::optional<FaultSpec> fault;
};

struct StrategySpec {
  BlockStrategy::Kind kind = BlockStrategy::Kind::Exact;
  std::optional<double> gamma;
  std::optional<double> alpha;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::optional<std::string> preset;
  std::vector<std::string> presets;  // compare
  std::optional<std::vector<StrategySpec>> strategies;
  SolverConfig solver;
  std::optional<std::vector<std::string>> checks;
  std::string trace_path = "trace.csv";
  std::string report_path = "report.json";
};

struct Options {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// Names accepted in the "checks" list.
const std::vector<std::string>& known_checks();

/// Strict schema validation; unknown fields are rejected. Throws
/// bam::Error(Configuration) naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Reads and parses a config file; parse errors carry line:column.
ExperimentConfig load_config(const std::filesystem::path& path);

Problem build_problem(const ProblemSpec& spec);

std::vector<BlockStrategy> to_strategies(const std::vector<StrategySpec>& specs);

/// The per-block strategies a config asks for: explicit "strategies", or the
/// named preset.
std::vector<BlockStrategy> resolve_strategies(const ExperimentConfig& cfg, const Problem& p,
                                              const std::string& preset);

/// Header: k,phi,phi_half,step_norm_sq,bregman_paid,residual,cum_step,inner_flag.
/// With a non-empty `preset`, a leading preset column is added.
void write_trace_csv(std::ostream& os, const IterateTrace& trace, bool with_header = true,
                     const std::string& preset = "");

/// Runs the named post-run diagnostics.
std::vector<CheckReport> run_checks(const Problem& p, const std::vector<BlockStrategy>& strategies,
                                    const RunResult& result, const SolverConfig& solver,
                                    const std::vector<std::string>& checks);

int cmd_run(const std::filesystem::path& config_path, const Options& opts);
int cmd_compare(const std::filesystem::path& config_path, const Options& opts);
int cmd_check(const std::filesystem::path& config_path, const Options& opts);

/// Applies BAM_LOG (error|info|debug) and --quiet to the library logger.
void configure_logging(bool quiet);

}  // namespace bam::experiment
