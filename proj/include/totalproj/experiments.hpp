#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "totalproj/csv_io.hpp"
#include "totalproj/value_estimators.hpp"

namespace totalproj {

// Raised when a run-time property an experiment asserts does not hold
// (oracle mismatch, bound violation, convergence miss). The CLI maps this to
// exit code 2.
struct AssertionFailure : std::runtime_error {
  explicit AssertionFailure(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
  std::string experiment = "outlier";

  // Instance parameters.
  int m = 20;
  int n = 1;
  double mu = 1.0;
  double sigma = 0.05;
  double p_outlier = 5.0;
  double reward = 1.0;
  double gamma = 0.5;

  SolverConfig solver;

  int repetitions = 1000;
  int episode_length = 40;     // MC episodes
  int td_episode_length = 2;   // TD(0) episodes; length 2 samples one exact pair
  double tolerance = 0.05;  // oracle-distance tolerance for the rl experiment
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct ExperimentReport {
  std::string name;
  nlohmann::json config;
  // Output tables keyed by file stem; written as <stem>.csv under out_dir.
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::map<std::string, double> summary;
  double wall_seconds = 0.0;  // diagnostic only, never serialized
};

// Mean per-state residuals V_s - phi_s^T w over resampled feature draws, for
// the scale-invariant and least-squares solutions on the outlier chain.
ExperimentReport run_outlier_experiment(const ExperimentConfig& cfg);

// Batch-mode error traces for plain alpha=1, curvature step, and curvature
// with momentum on one seeded Gaussian system.
ExperimentReport run_step_comparison(const ExperimentConfig& cfg);

// Mean error traces across repetitions for a heavy-ball beta sweep on systems
// sampled uniformly from [-1, 1].
ExperimentReport run_momentum_comparison(const ExperimentConfig& cfg);

// Normalized MC and TD(0) on random ergodic chains: final oracle distances,
// tensor/brute-force fixed-point agreement, and the error-bound report.
ExperimentReport run_rl_estimators(const ExperimentConfig& cfg);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Writes every table of the report under dir.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace totalproj
