#pragma once

#include <functional>
#include <vector>

#include "ggmc/types.hpp"

namespace ggmc {

/// minimize m(x) + h(x) with m smooth convex and h prox-friendly.
struct FbsProblem {
  std::function<Vector(const Vector&)> gradient;          // grad m
  std::function<double(const Vector&)> smooth_value;      // m
  std::function<double(const Vector&)> nonsmooth_value;   // h
  std::function<Vector(const Vector&, double)> prox;      // prox_{t h}(u)
  Vector x0;
};

struct FbsOptions {
  int max_iterations = 2000;
  double tolerance = 1e-8;      // on the normalized residual
  int window = 10;              // nonmonotone line-search window
  double shrink = 0.5;          // stepsize backtracking factor
  double initial_step = 0.0;    // 0 = 1/L with L from two-point gradients
};

struct FbsReport {
  int iterations = 0;
  double residual = 0.0;        // final normalized residual
  double step = 0.0;            // last accepted stepsize
  std::vector<double> objective_trace;
};

/// Forward-backward splitting with Barzilai-Borwein stepsizes and a
/// nonmonotone backtracking line search. Stops once the normalized
/// fixed-point residual is below tolerance and the relative objective change
/// has stayed below tolerance for 3 consecutive iterations. Throws
/// ConvergenceError when iterations run out and DivergenceError on NaN.
std::pair<Vector, FbsReport> fbs_solve(const FbsProblem& problem,
                                       const FbsOptions& opts = {});

}  // namespace ggmc
