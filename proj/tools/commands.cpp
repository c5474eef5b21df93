#include "commands.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fstream>
#include <iostream>
#include <map>

#include "ggmc/csv.hpp"
#include "ggmc/cv.hpp"
#include "ggmc/sim.hpp"

namespace ggmc::cli {

namespace {

using csv::format_number;

struct Problem {
  GroupedDesign design;        // as loaded (raw scale)
  Response response;           // raw scale
  GroupedDesign fit_design;    // what the solver sees
  Response fit_response;
  StandardizationRecord record;
};

Problem load(const RunConfig& config) {
  if (config.data_file.empty()) throw ValidationError("data file required");
  if (config.groups_file.empty()) throw ValidationError("groups file required");
  if (config.response_column.empty())
    throw ValidationError("response column required");
  auto [design, response] =
      load_problem(config.data_file, config.groups_file, config.response_column);
  Problem p{design, response, design, response, {}};
  if (config.standardize) {
    auto [ds, ys] = standardize(p.design, p.response, p.record);
    p.fit_design = std::move(ds);
    p.fit_response = std::move(ys);
  }
  return p;
}

PdhgOptions solver_options(const RunConfig& config) {
  PdhgOptions opts;
  opts.tolerance = config.tol;
  opts.max_iterations = config.max_iter;
  return opts;
}

void write_sidecar(const RunConfig& config,
                   const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ofstream out(config.out_prefix + "_config.txt");
  out << "command=" << config.command << "\n";
  if (!config.data_file.empty()) out << "data=" << config.data_file << "\n";
  if (!config.groups_file.empty()) out << "groups=" << config.groups_file << "\n";
  if (!config.response_column.empty())
    out << "response=" << config.response_column << "\n";
  if (!config.beta_star_file.empty())
    out << "beta_star=" << config.beta_star_file << "\n";
  out << "out=" << config.out_prefix << "\n";
  out << "alpha=" << format_number(config.alpha) << "\n";
  if (config.lambda >= 0.0) out << "lambda=" << format_number(config.lambda) << "\n";
  if (config.command == "path" || config.command == "cv" ||
      config.command == "simulate") {
    out << "nlambda=" << config.nlambda << "\n";
    out << "lambda_min_ratio=" << format_number(config.lambda_min_ratio) << "\n";
  }
  if (config.command == "cv" || config.command == "simulate") {
    out << "folds=" << config.folds << "\n";
    out << "seed=" << config.seed << "\n";
    out << "threads=" << config.threads << "\n";
  }
  if (config.command == "cv") out << "one_se=" << (config.one_se ? 1 : 0) << "\n";
  if (config.command == "simulate") {
    out << "case=" << config.case_name << "\n";
    out << "replicates=" << config.replicates << "\n";
    out << "n=" << config.sim_n << "\n";
    std::string alphas;
    for (double a : config.alphas)
      alphas += (alphas.empty() ? "" : ",") + format_number(a);
    out << "alphas=" << alphas << "\n";
  }
  out << "standardize=" << (config.standardize ? 1 : 0) << "\n";
  out << "tol=" << format_number(config.tol) << "\n";
  out << "max_iter=" << config.max_iter << "\n";
  for (const auto& [key, value] : extra) out << key << "=" << value << "\n";
}

/// Coefficients in original column order with their group labels.
void write_coefficients(const std::string& file, const GroupedDesign& design,
                        const Vector& beta_internal_raw) {
  const Vector orig = design.to_original_order(beta_internal_raw);
  std::vector<std::string> names(design.p()), groups(design.p());
  for (Index c = 0; c < design.p(); ++c) {
    const Index o = design.original_index(c);
    names[o] = design.column_names()[c];
    groups[o] = design.group(design.group_of_column(c)).name;
  }
  std::ofstream out(file);
  out << "column,group,coefficient\n";
  for (Index o = 0; o < design.p(); ++o)
    out << names[o] << "," << groups[o] << "," << format_number(orig[o]) << "\n";
}

std::vector<std::string> active_group_names(const GroupedDesign& design,
                                            const Vector& beta) {
  std::vector<std::string> names;
  for (Index j = 0; j < design.num_groups(); ++j) {
    const auto& g = design.group(j);
    if (beta.segment(g.start, g.size).norm() > 1e-8) names.push_back(g.name);
  }
  return names;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out.empty() ? "none" : out;
}

void warn_design(const Problem& p, std::ostream& out) {
  if (!p.design.zero_variance_columns().empty()) {
    std::vector<std::string> names;
    for (Index c : p.design.zero_variance_columns())
      names.push_back(p.design.column_names()[c]);
    out << "warning: zero-variance columns: " << join(names) << "\n";
  }
  // Theory scaling condition ||X_j|| <= sqrt(n); informational only.
  std::vector<std::string> oversized;
  const double root_n = std::sqrt(static_cast<double>(p.fit_design.n()));
  for (Index j = 0; j < p.fit_design.num_groups(); ++j) {
    const Eigen::JacobiSVD<Matrix> svd(p.fit_design.block(j));
    if (svd.singularValues()[0] > root_n * (1.0 + 1e-12))
      oversized.push_back(p.fit_design.group(j).name);
  }
  if (!oversized.empty())
    out << "warning: groups exceeding the ||X_j|| <= sqrt(n) scaling condition: "
        << join(oversized) << "\n";
}

double resolved_ratio(const RunConfig& config, const GroupedDesign& design) {
  return config.lambda_min_ratio > 0.0 ? config.lambda_min_ratio
                                       : default_grid_ratio(design);
}

Vector read_beta_star(const std::string& file, const GroupedDesign& design) {
  csv::Table t = csv::read_table(file);
  if (t.num_cols() != 2 || t.header[0] != "column" || t.header[1] != "value")
    throw ValidationError("beta* file must have header 'column,value'");
  std::map<std::string, double> values;
  for (const auto& row : t.rows)
    values[row[0]] = csv::parse_number(row[1], "beta* value for " + row[0]);
  Vector beta = Vector::Zero(design.p());
  for (Index c = 0; c < design.p(); ++c) {
    auto it = values.find(design.column_names()[c]);
    if (it == values.end())
      throw ValidationError("beta* file is missing column '" +
                            design.column_names()[c] + "'");
    beta[c] = it->second;
  }
  return beta;
}

}  // namespace

int cmd_fit(const RunConfig& config) {
  if (config.lambda < 0.0) throw ValidationError("fit requires --lambda");
  Problem p = load(config);

  GmcConfig cfg;
  cfg.alpha = config.alpha;
  cfg.lambda = config.lambda;
  const double lmax = lambda_max(p.fit_design, p.fit_response);

  auto res = pdhg_solve(p.fit_design, p.fit_response, cfg, solver_options(config));
  const double kkt = kkt_residual(res.beta, res.v, p.fit_design, p.fit_response, cfg);
  const double objective = objective_value(res.beta, p.fit_design, p.fit_response, cfg);
  const Vector beta_raw = config.standardize ? p.record.unstandardize(res.beta)
                                             : res.beta;

  write_coefficients(config.out_prefix + "_coefficients.csv", p.design, beta_raw);

  std::ofstream report(config.out_prefix + "_report.txt");
  report << "lambda: " << format_number(config.lambda) << "\n";
  report << "lambda_max: " << format_number(lmax) << "\n";
  report << "alpha: " << format_number(config.alpha) << "\n";
  report << "converged: " << (res.report.converged ? "yes" : "no") << "\n";
  report << "iterations: " << res.report.iterations << "\n";
  report << "objective: " << format_number(objective) << "\n";
  report << "kkt_residual: " << format_number(kkt) << "\n";
  report << "active_groups: " << join(active_group_names(p.design, beta_raw)) << "\n";
  if (config.standardize)
    report << "intercept: " << format_number(p.record.intercept(beta_raw)) << "\n";
  if (!res.report.note.empty()) report << "note: " << res.report.note << "\n";
  warn_design(p, report);

  write_sidecar(config, {
    {"lambda_max", format_number(lmax)},
    {"converged", res.report.converged ? "1" : "0"},
  });
  if (!res.report.converged) {
    std::cerr << "fit did not converge in " << res.report.iterations
              << " iterations\n";
    return 2;
  }
  return 0;
}

int cmd_path(const RunConfig& config) {
  if (config.lambda >= 0.0)
    throw ValidationError("path takes --nlambda/--lambda-min-ratio, not --lambda");
  Problem p = load(config);
  GmcConfig cfg;
  cfg.alpha = config.alpha;
  const double ratio = resolved_ratio(config, p.fit_design);
  LambdaGrid grid = make_grid(p.fit_design, p.fit_response, config.nlambda, ratio);
  SolutionPath path = solution_path(p.fit_design, p.fit_response, grid, cfg,
                                    solver_options(config));

  std::ofstream out(config.out_prefix + "_path.csv");
  out << "lambda,column,group,coefficient\n";
  std::vector<std::string> names(p.design.p()), groups(p.design.p());
  for (Index c = 0; c < p.design.p(); ++c) {
    const Index o = p.design.original_index(c);
    names[o] = p.design.column_names()[c];
    groups[o] = p.design.group(p.design.group_of_column(c)).name;
  }
  int non_converged = 0;
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    Vector beta = path.coefficients.col(static_cast<Index>(i));
    if (config.standardize) beta = p.record.unstandardize(beta);
    const Vector orig = p.design.to_original_order(beta);
    for (Index o = 0; o < p.design.p(); ++o)
      out << format_number(grid.values[i]) << "," << names[o] << ","
          << groups[o] << "," << format_number(orig[o]) << "\n";
    if (!path.reports[i].converged) ++non_converged;
  }

  std::ofstream report(config.out_prefix + "_report.txt");
  report << "lambda_max: " << format_number(grid.values.front()) << "\n";
  report << "grid_points: " << grid.values.size() << "\n";
  report << "non_converged_points: " << non_converged << "\n";
  warn_design(p, report);

  write_sidecar(config, {{"non_converged_points", std::to_string(non_converged)}});
  return non_converged == 0 ? 0 : 2;
}

int cmd_cv(const RunConfig& config) {
  Problem p = load(config);
  GmcConfig cfg;
  cfg.alpha = config.alpha;
  const double ratio = resolved_ratio(config, p.fit_design);
  // Grid from the full data; per-fold fits reuse it so curves are comparable.
  LambdaGrid grid = make_grid(p.fit_design, p.fit_response, config.nlambda, ratio);

  CvOptions cv_opts;
  cv_opts.solver = solver_options(config);
  cv_opts.standardize = config.standardize;
  cv_opts.threads = config.threads;
  // CV on the raw-scale problem; per-fold standardization happens inside.
  CvResult cv = cross_validate(p.design, p.response, config.folds, grid, cfg,
                               config.seed, cv_opts);

  std::ofstream curve(config.out_prefix + "_cv.csv");
  curve << "lambda,mean_error,std_error\n";
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    curve << format_number(grid.values[i]) << ","
          << format_number(cv.mean_error[i]) << ","
          << format_number(cv.std_error[i]) << "\n";

  const std::size_t pick = config.one_se ? cv.selected_index_1se : cv.selected_index;
  const double lambda_sel = grid.values[pick];

  // Refit on the full data at the selected lambda (walking the grid prefix).
  LambdaGrid head = grid;
  head.values.resize(pick + 1);
  SolutionPath path = solution_path(p.fit_design, p.fit_response, head, cfg,
                                    solver_options(config));
  Vector beta = path.coefficients.col(static_cast<Index>(pick));
  if (config.standardize) beta = p.record.unstandardize(beta);
  write_coefficients(config.out_prefix + "_coefficients.csv", p.design, beta);

  const auto active = active_group_names(p.design, beta);
  std::vector<std::string> excluded;
  for (Index j = 0; j < p.design.num_groups(); ++j) {
    const auto& name = p.design.group(j).name;
    bool found = false;
    for (const auto& a : active) found = found || a == name;
    if (!found) excluded.push_back(name);
  }

  std::ofstream report(config.out_prefix + "_report.txt");
  report << "selected_lambda: " << format_number(lambda_sel) << "\n";
  report << "selection_rule: " << (config.one_se ? "one-se" : "min") << "\n";
  report << "selected_lambda_min_rule: " << format_number(cv.selected_lambda) << "\n";
  report << "selected_lambda_one_se: " << format_number(cv.selected_lambda_1se) << "\n";
  report << "cv_error_at_selected: " << format_number(cv.mean_error[pick]) << "\n";
  report << "nonzero_groups: " << active.size() << "\n";
  report << "active_groups: " << join(active) << "\n";
  report << "excluded_groups: " << join(excluded) << "\n";
  report << "refit_converged: " << (path.reports.back().converged ? "yes" : "no") << "\n";
  if (config.standardize)
    report << "intercept: " << format_number(p.record.intercept(beta)) << "\n";
  warn_design(p, report);

  write_sidecar(config, {{"selected_lambda", format_number(lambda_sel)}});
  return path.reports.back().converged ? 0 : 2;
}

int cmd_simulate(const RunConfig& config) {
  CaseOptions opts;
  opts.nlambda = config.nlambda;
  opts.lambda_min_ratio = config.lambda_min_ratio > 0.0 ? config.lambda_min_ratio : 1e-2;
  opts.folds = config.folds;
  opts.n = config.sim_n;
  opts.threads = config.threads;
  opts.solver = solver_options(config);

  auto table = run_case(config.case_name, config.replicates, config.alphas,
                        config.seed, opts);

  std::ofstream out(config.out_prefix + "_results.csv");
  out << "case,snr,rho,p,alpha,metric,mean,stderr,replicates,failures\n";
  for (const auto& cell : table) {
    for (std::size_t k = 0; k < cell.metric_names.size(); ++k) {
      out << cell.case_name << "," << format_number(cell.snr) << ","
          << format_number(cell.rho) << "," << cell.p << ","
          << format_number(cell.alpha) << "," << cell.metric_names[k] << ","
          << format_number(cell.means[k]) << ","
          << format_number(cell.stderrs[k]) << "," << cell.replicates << ","
          << cell.failures << "\n";
    }
  }
  write_sidecar(config, {});
  return 0;
}

int cmd_diagnose(const RunConfig& config) {
  Problem p = load(config);
  const double lmax = lambda_max(p.fit_design, p.fit_response);
  const double lambda = config.lambda >= 0.0 ? config.lambda : 0.1 * lmax;

  std::ofstream report(config.out_prefix + "_diagnostics.txt");
  report << "n: " << p.design.n() << "\n";
  report << "p: " << p.design.p() << "\n";
  report << "groups: " << p.design.num_groups() << "\n";
  report << "lambda_max: " << format_number(lmax) << "\n";
  report << "alpha: " << format_number(config.alpha) << "\n";
  report << "lambda: " << format_number(lambda) << "\n";

  GmcConfig cfg;
  cfg.alpha = config.alpha;
  cfg.lambda = lambda;
  const auto convexity = check_convexity(p.fit_design, cfg);
  report << "convexity: "
         << (convexity.by_construction
                 ? std::string("holds by construction (alpha <= 1)")
                 : (convexity.ok ? "holds" : "violated"))
         << "\n";
  if (p.fit_design.p() <= 2000) {
    // Margin of X'X - lambda B'B = (1-alpha) X'X under the default B.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(
        (1.0 - config.alpha) * (p.fit_design.X().transpose() * p.fit_design.X()),
        Eigen::EigenvaluesOnly);
    report << "convexity_margin: " << format_number(eig.eigenvalues().minCoeff())
           << "\n";
  } else {
    report << "convexity_margin: not computed (p > 2000)\n";
  }

  if (!config.beta_star_file.empty()) {
    if (!(lambda > 0.0))
      throw ValidationError("theory diagnostics need lambda > 0");
    const Vector beta_star = read_beta_star(config.beta_star_file, p.fit_design);
    const Matrix btb = btb_from_design(p.fit_design, config.alpha, lambda);
    auto diag = theory_diagnostics(p.fit_design, beta_star, btb);
    report << "support_groups: " << diag.support.size() << "\n";
    report << "nu_bar: "
           << (diag.nu_bar ? format_number(*diag.nu_bar) : "undefined") << "\n";
    report << "nu_underline: "
           << (diag.nu_underline ? format_number(*diag.nu_underline) : "undefined")
           << "\n";
    report << "assumption_a3: " << (diag.a3_ok ? "satisfied" : "violated") << "\n";
    for (Index j = 0; j < p.fit_design.num_groups(); ++j) {
      const auto& g = p.fit_design.group(j);
      report << "nu[" << g.name << "]: " << format_number(diag.nu[j]) << "\n";
    }
  }
  warn_design(p, report);

  write_sidecar(config, {{"lambda_max", format_number(lmax)}});
  return 0;
}

}  // namespace ggmc::cli
