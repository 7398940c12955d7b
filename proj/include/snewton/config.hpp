#pragma once

// Flat key = value experiment files with dotted section keys, and the typed
// experiment description built from them. See docs/config.md for the keys.

#include "snewton/objectives.hpp"
#include "snewton/solvers.hpp"
#include "snewton/stability.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace snewton {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed key = value text. '#' starts a comment; blank lines are ignored;
/// repeated keys are an error. Every lookup marks the key as used so that
/// misspelled keys can be reported.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& source = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  /// Adds or replaces a key (command-line overrides).
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback = {}) const;
  std::vector<std::string> get_words(const std::string& key,
                                     std::vector<std::string> fallback = {}) const;

  /// Keys never read since parsing.
  std::vector<std::string> unused_keys() const;
  const std::string& source() const { return source_; }
  /// Directory against which relative paths in the file resolve.
  const std::filesystem::path& base_dir() const { return base_dir_; }
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string source_;
  std::filesystem::path base_dir_;
};

struct ProblemSpec {
  std::string zoo;                         // empty when libsvm is set
  ZooParams params;
  std::optional<std::filesystem::path> libsvm;
  std::string link = "logistic";
  bool normalize = true;
  std::string regularizer = "none";        // none | l1 | box (libsvm problems)
  std::optional<Vector> x0;
  std::optional<Box> region;
  std::optional<double> f_star;            // absent means known or bootstrapped
  /// Canonical description, used to check that compared configs agree.
  std::string fingerprint;
};

struct RunSpec {
  std::string id;
  std::string solver;
  SolverConfig cfg;
  bool sigma_auto = false;
  double sigma_scale = 1.0;               // multiplies an automatic sigma
  double gamma = 1.0;                     // affine_invariant_tr
  double step = 0.0;                      // gradient_descent, 0 means 1/L estimate
};

struct ProbeSpec {
  bool enabled = false;
  std::vector<std::string> constants{"c", "d", "path_c"};
  SamplerConfig sampler;
  std::vector<double> r_grid;
  std::vector<double> gamma_grid;
  NormSpec norm = NormSpec::l2();
};

struct TheorySpec {
  /// none | exact_newton | trust_region | approx_prox | affine_invariant | power_even
  std::string bound = "none";
  double r = kNaN;
};

struct ReportSpec {
  double tail_fraction = 0.5;
  double noise_floor = 1e-11;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  std::vector<RunSpec> runs;
  ProbeSpec probe;
  TheorySpec theory;
  ReportSpec report;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
};

NormSpec parse_norm(const std::string& name);
std::uint64_t parse_seed(const std::string& text);
ApproxScheme parse_approx(const std::string& text);

/// Builds the typed experiment. Throws ConfigError for unknown solver names,
/// malformed values, missing files and unused keys.
ExperimentConfig parse_experiment(const KeyValueConfig& kv);

const std::vector<std::string>& solver_names();

}  // namespace snewton
