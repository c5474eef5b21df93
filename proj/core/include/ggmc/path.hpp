#pragma once

#include <vector>

#include "ggmc/pdhg.hpp"

namespace ggmc {

struct LambdaGrid {
  std::vector<double> values;  // strictly decreasing
  int count = 0;
  double ratio = 0.0;
};

struct SolutionPath {
  LambdaGrid grid;
  Matrix coefficients;               // p x |grid|
  std::vector<PdhgReport> reports;   // one per lambda
  std::vector<std::vector<Index>> active_groups;

  bool all_converged() const;
};

/// `count` log-spaced values from lambda_max(design,y) down to
/// ratio * lambda_max.
LambdaGrid make_grid(const GroupedDesign& design, const Response& response,
                     int count, double ratio);
LambdaGrid make_grid_from(double lambda_top, int count, double ratio);

/// Default grid shape: 100 points, ratio 1e-3 when n > p, 1e-2 otherwise.
double default_grid_ratio(const GroupedDesign& design);

/// Solves the whole grid by warm-started homotopy: each lambda starts from
/// the previous solution's saddle state, the first (largest) from zero.
/// Non-converged points are flagged in their report and the path continues.
SolutionPath solution_path(const GroupedDesign& design, const Response& response,
                           const LambdaGrid& grid, const GmcConfig& cfg_no_lambda,
                           const PdhgOptions& opts = {});

}  // namespace ggmc
