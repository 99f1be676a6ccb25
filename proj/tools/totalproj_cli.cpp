#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "totalproj/experiments.hpp"

namespace {

using namespace totalproj;

void add_solver_options(CLI::App* app, SolverConfig* sc, std::string* mode,
                        std::string* rule) {
  app->add_option("--p", sc->p, "decay exponent for 1/k^p, in (0.5, 1]");
  app->add_option("--beta", sc->beta, "heavy-ball multiplier, in [0, 1)");
  app->add_option("--epsilon", sc->epsilon_guard, "skip threshold on ||delta TP||");
  app->add_option("--tau", sc->tau, "rows per stochastic step");
  app->add_option("--iters", sc->max_iters, "iteration count");
  app->add_option("--alpha", sc->alpha, "fixed step size, in (0, 2)");
  app->add_option("--mode", *mode, "batch|stochastic")
      ->check(CLI::IsMember({"batch", "stochastic"}));
  app->add_option("--step", *rule, "curvature|fixed")
      ->check(CLI::IsMember({"curvature", "fixed"}));
}

int run_solve(const std::string& system_path, SolverConfig sc,
              const std::string& out_dir) {
  const OverdeterminedSystem sys = read_system_csv(system_path);
  const SolveResult result = solve(sys, sc);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_trace_csv(result.trace, dir / "solve_trace.csv");

  std::cout << "w =";
  for (int j = 0; j < result.w.size(); ++j) std::cout << ' ' << format_double(result.w[j]);
  std::cout << "\nnormalized_error = " << format_double(normalized_error(sys, result.w))
            << "\nleast_squares_error = "
            << format_double(least_squares_error(sys, result.w))
            << "\ntrace: " << (dir / "solve_trace.csv").string() << '\n';
  return 0;
}

ExperimentConfig outlier_defaults() {
  ExperimentConfig c;
  c.experiment = "outlier";
  return c;  // m=20, n=1, 1000 repetitions, the documented chain parameters
}

ExperimentConfig steps_defaults() {
  ExperimentConfig c;
  c.experiment = "steps";
  c.m = 20;
  c.n = 5;
  c.solver.max_iters = 2000;
  return c;
}

ExperimentConfig momentum_defaults() {
  ExperimentConfig c;
  c.experiment = "momentum";
  c.m = 20;
  c.n = 5;
  c.repetitions = 10;
  c.solver.max_iters = 3000;
  return c;
}

ExperimentConfig rl_defaults() {
  ExperimentConfig c;
  c.experiment = "rl";
  c.m = 10;
  c.n = 3;
  c.gamma = 0.6;
  c.repetitions = 3;
  c.episode_length = 40;
  c.solver.max_iters = 200000;
  c.solver.mode = SolveMode::kStochastic;
  return c;
}

void add_experiment_options(CLI::App* sub, ExperimentConfig* cfg) {
  sub->add_option("--m", cfg->m, "number of states / rows");
  sub->add_option("--n", cfg->n, "feature dimension / columns");
  sub->add_option("--mu", cfg->mu, "feature mean");
  sub->add_option("--sigma", cfg->sigma, "feature standard deviation");
  sub->add_option("--p", cfg->p_outlier, "outlier multiple of mu");
  sub->add_option("--r", cfg->reward, "constant transition reward");
  sub->add_option("--gamma", cfg->gamma, "discount factor");
  sub->add_option("--reps", cfg->repetitions, "repetitions");
  sub->add_option("--iters", cfg->solver.max_iters, "iterations");
  sub->add_option("--episode-length", cfg->episode_length, "states per episode");
  sub->add_option("--tolerance", cfg->tolerance, "oracle-distance tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale-invariant solver for overdetermined systems with "
               "normalized value-estimation experiments"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::string format = "csv";
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "base seed");
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv"}));

  auto* solve_cmd = app.add_subcommand("solve", "solve a system CSV");
  std::string system_path;
  solve_cmd->add_option("system", system_path, "CSV with header phi_0..,v,d")
      ->required();
  SolverConfig solve_sc;
  solve_sc.max_iters = 500;
  std::string solve_mode = "batch", solve_rule = "curvature";
  add_solver_options(solve_cmd, &solve_sc, &solve_mode, &solve_rule);

  auto* exp_cmd = app.add_subcommand("experiment", "run a named experiment");
  exp_cmd->require_subcommand(1);
  std::string config_path;
  exp_cmd->add_option("--config", config_path,
                      "JSON config mirroring ExperimentConfig; numeric flags of the "
                      "subcommand are ignored when given");

  ExperimentConfig cfg_outlier = outlier_defaults();
  ExperimentConfig cfg_steps = steps_defaults();
  ExperimentConfig cfg_momentum = momentum_defaults();
  ExperimentConfig cfg_rl = rl_defaults();

  auto* outlier = exp_cmd->add_subcommand("outlier", "outlier-chain residual table");
  add_experiment_options(outlier, &cfg_outlier);
  auto* steps = exp_cmd->add_subcommand("steps", "step-rule comparison traces");
  add_experiment_options(steps, &cfg_steps);
  auto* momentum = exp_cmd->add_subcommand("momentum", "heavy-ball beta sweep");
  add_experiment_options(momentum, &cfg_momentum);
  auto* rl = exp_cmd->add_subcommand("rl", "normalized MC/TD(0) vs oracles");
  add_experiment_options(rl, &cfg_rl);

  try {
    app.parse(argc, argv);

    if (*solve_cmd) {
      solve_sc.seed = seed;
      solve_sc.mode =
          solve_mode == "stochastic" ? SolveMode::kStochastic : SolveMode::kBatch;
      solve_sc.step_rule =
          solve_rule == "fixed" ? StepRule::kFixedAlpha : StepRule::kCurvature;
      return run_solve(system_path, solve_sc, out_dir);
    }

    ExperimentConfig cfg = cfg_outlier;
    if (*steps) cfg = cfg_steps;
    if (*momentum) cfg = cfg_momentum;
    if (*rl) cfg = cfg_rl;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw DimensionMismatch("cannot read config: " + config_path);
      cfg = ExperimentConfig::from_json(nlohmann::json::parse(in));
    }
    if (seed_opt->count() > 0 || config_path.empty()) cfg.seed = seed;
    cfg.out_dir = out_dir;

    const ExperimentReport report = run_experiment(cfg);
    write_report(report, out_dir);
    for (const auto& [key, value] : report.summary) {
      std::cout << key << " = " << format_double(value) << '\n';
    }
    std::cerr << "wall_seconds = " << report.wall_seconds << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
