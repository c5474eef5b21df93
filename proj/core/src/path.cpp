#include "ggmc/path.hpp"

#include <cmath>

namespace ggmc {

bool SolutionPath::all_converged() const {
  for (const auto& r : reports)
    if (!r.converged) return false;
  return true;
}

LambdaGrid make_grid_from(double lambda_top, int count, double ratio) {
  if (count < 2) throw ValidationError("lambda grid needs at least 2 points");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ValidationError("lambda-min ratio must lie in (0,1)");
  if (lambda_top <= 0.0)
    throw ValidationError("zero path: lambda_max is 0, nothing to regularize");
  LambdaGrid grid;
  grid.count = count;
  grid.ratio = ratio;
  grid.values.resize(count);
  const double log_top = std::log(lambda_top);
  const double log_ratio = std::log(ratio);
  for (int i = 0; i < count; ++i)
    grid.values[i] = std::exp(log_top + log_ratio * i / (count - 1));
  return grid;
}

LambdaGrid make_grid(const GroupedDesign& design, const Response& response,
                     int count, double ratio) {
  return make_grid_from(lambda_max(design, response), count, ratio);
}

double default_grid_ratio(const GroupedDesign& design) {
  return design.n() > design.p() ? 1e-3 : 1e-2;
}

SolutionPath solution_path(const GroupedDesign& design, const Response& response,
                           const LambdaGrid& grid, const GmcConfig& cfg_no_lambda,
                           const PdhgOptions& opts) {
  if (grid.values.empty()) throw ValidationError("empty lambda grid");
  for (std::size_t i = 1; i < grid.values.size(); ++i)
    if (!(grid.values[i] < grid.values[i - 1]))
      throw ValidationError("lambda grid must be strictly decreasing");

  SolutionPath path;
  path.grid = grid;
  path.coefficients.resize(design.p(), static_cast<Index>(grid.values.size()));
  path.reports.reserve(grid.values.size());
  path.active_groups.reserve(grid.values.size());

  std::optional<SaddleState> warm;
  GmcConfig cfg = cfg_no_lambda;
  cfg.lambda = grid.values.front();
  // One ops instance serves the whole path: the Gram cache is shared across
  // lambdas, and under the default B the Z operator is lambda-free anyway.
  const ProblemOps base_ops(design, cfg);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const ProblemOps ops = base_ops.with_lambda(grid.values[i]);
    PdhgResult res = pdhg_solve(ops, response, opts, warm);
    path.coefficients.col(static_cast<Index>(i)) = res.beta;
    path.reports.push_back(res.report);
    std::vector<Index> active;
    for (Index j = 0; j < design.num_groups(); ++j) {
      const auto& g = design.group(j);
      if (res.beta.segment(g.start, g.size).norm() > 1e-8) active.push_back(j);
    }
    path.active_groups.push_back(std::move(active));
    warm = res.state();
  }
  return path;
}

}  // namespace ggmc
