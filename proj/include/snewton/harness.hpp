#pragma once

// Experiment driver behind the `snewton` command: builds the problem from a
// config, runs the configured solvers, compares measured rates with the
// predicted ones and writes trace.csv, trace.json, stability.json and
// report.json.

#include "snewton/config.hpp"
#include "snewton/domain.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace snewton {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitSamples = 4;

struct ProblemInstance {
  std::string name;
  CompositeObjective F;
  Vector x0;
  std::optional<Box> region;
  std::optional<ScalarLink> link;
  double f_star = kNaN;
  std::string f_star_source;  // known | config | bootstrap
};

ProblemInstance build_problem(const ProblemSpec& spec);

/// The region stability constants are measured on: the problem's box when
/// it has one, else the level set through x0.
LevelSetDomain problem_domain(const ProblemInstance& p, const NormSpec& norm, std::uint64_t seed);

struct RunOutcome {
  RunSpec spec;
  SolveTrace trace;
  std::optional<std::string> failure;
  nlohmann::json summary;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  nlohmann::json report;
  std::optional<nlohmann::json> stability;
  int exit_code = kExitOk;
};

/// Runs every configured solver. With `write`, outputs land in
/// cfg.output_dir (per-run subdirectories when there is more than one run).
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write = true);

/// Stability constants over the configured grids plus the rates they
/// predict. Throws InsufficientSamples.
nlohmann::json probe_stability(const ExperimentConfig& cfg, const ProblemInstance& p);

struct CompareRow {
  std::string config;
  std::string run;
  std::string solver;
  std::array<std::optional<int>, 3> iterations;  // gaps 1e-3, 1e-6, 1e-9
};

struct CompareTable {
  std::vector<CompareRow> rows;
  std::string csv;
  std::string text;
};

inline constexpr std::array<double, 3> kCompareThresholds{1e-3, 1e-6, 1e-9};

/// Needs at least two configs describing the same problem; throws
/// ConfigError otherwise.
CompareTable compare_experiments(const std::vector<ExperimentConfig>& cfgs);

std::filesystem::path preset_dir();
std::vector<std::string> preset_names();
std::filesystem::path preset_path(const std::string& name);

/// Entry point of the command-line tool; returns the process exit code.
int cli_main(int argc, const char* const* argv);

}  // namespace snewton
