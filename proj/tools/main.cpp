#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "ggmc/types.hpp"

namespace {

using ggmc::cli::RunConfig;

void add_data_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--data", config.data_file, "design CSV (includes the response column)");
  cmd->add_option("--groups", config.groups_file, "column,group map CSV");
  cmd->add_option("--response", config.response_column, "name of the response column");
  cmd->add_flag("--standardize", config.standardize,
                "center/scale predictors and center the response; coefficients are mapped back");
}

void add_solver_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--alpha", config.alpha, "convexity-preserving parameter in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--tol", config.tol, "solver tolerance");
  cmd->add_option("--max-iter", config.max_iter, "outer iteration cap");
  cmd->add_option("--out", config.out_prefix, "output file prefix");
}

void add_grid_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--nlambda", config.nlambda, "number of lambda grid points");
  cmd->add_option("--lambda-min-ratio", config.lambda_min_ratio,
                  "smallest lambda as a fraction of lambda_max");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group GMC: grouped variable selection with a convexity-preserving nonconvex penalty"};
  app.require_subcommand(1);
  RunConfig config;

  auto* fit = app.add_subcommand("fit", "solve at one lambda");
  add_data_options(fit, config);
  add_solver_options(fit, config);
  fit->add_option("--lambda", config.lambda, "tuning parameter");

  auto* path = app.add_subcommand("path", "solve a descending lambda grid");
  add_data_options(path, config);
  add_solver_options(path, config);
  add_grid_options(path, config);

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation and refit");
  add_data_options(cv, config);
  add_solver_options(cv, config);
  add_grid_options(cv, config);
  cv->add_option("--folds", config.folds, "number of folds");
  cv->add_option("--seed", config.seed, "fold assignment seed");
  cv->add_flag("--one-se", config.one_se, "select by the one-standard-error rule");
  cv->add_option("--threads", config.threads, "worker cap for folds");

  auto* sim = app.add_subcommand("simulate", "run an ANOVA experiment case");
  add_solver_options(sim, config);
  add_grid_options(sim, config);
  sim->add_option("--case", config.case_name, "C1, C2, or C3");
  sim->add_option("--replicates", config.replicates, "replicates per cell");
  sim->add_option("--seed", config.seed, "master seed");
  sim->add_option("--folds", config.folds, "CV folds per fit");
  sim->add_option("--n", config.sim_n, "sample size per replicate");
  sim->add_option("--alphas", config.alphas, "alpha list (defaults per case)");
  sim->add_option("--threads", config.threads, "worker cap for replicates");

  auto* diag = app.add_subcommand("diagnose", "lambda_max, convexity and theory diagnostics");
  add_data_options(diag, config);
  add_solver_options(diag, config);
  diag->add_option("--lambda", config.lambda, "lambda for B'B (default 0.1 * lambda_max)");
  diag->add_option("--beta-star", config.beta_star_file,
                   "column,value CSV of true coefficients for the nu diagnostics");

  // Defaults that depend on the subcommand.
  sim->callback([&] { if (!sim->count("--nlambda")) config.nlambda = 50; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) { config.command = "fit"; return ggmc::cli::cmd_fit(config); }
    if (path->parsed()) { config.command = "path"; return ggmc::cli::cmd_path(config); }
    if (cv->parsed()) { config.command = "cv"; return ggmc::cli::cmd_cv(config); }
    if (sim->parsed()) { config.command = "simulate"; return ggmc::cli::cmd_simulate(config); }
    if (diag->parsed()) { config.command = "diagnose"; return ggmc::cli::cmd_diagnose(config); }
  } catch (const ggmc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ggmc::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ggmc::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
