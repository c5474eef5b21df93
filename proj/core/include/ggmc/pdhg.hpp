#pragma once

#include <functional>
#include <optional>
#include <string>

#include "ggmc/penalties.hpp"

namespace ggmc {

/// Primal/dual iterates plus the stepsizes that produced them; hand the final
/// state of one solve to the next lambda to warm start it.
struct SaddleState {
  Vector beta;
  Vector v;
  double tau = 0.0;
  double sigma = 0.0;
};

struct PdhgOptions {
  int max_iterations = 10000;
  double tolerance = 1e-6;     // on max(primal,dual) residual / (1 + ||beta||)
  bool adaptive = true;        // residual-balancing stepsizes
  double balance_ratio = 10.0; // rebalance when residuals differ by this factor
  double balance_factor = 0.7; // shrink applied to the leading side's stepsize
  int max_adaptations = 64;
  double step_product = 0.95;  // tau * sigma * ||Z||^2
  std::optional<double> inner_tolerance;  // default 0.1 * tolerance, floor 1e-10
  int inner_max_iterations = 20000;
};

struct PdhgReport {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  bool uniqueness_guaranteed = true;  // false when n <= p and alpha = 1
  int adaptations = 0;
  long inner_iterations = 0;
  std::string note;
};

struct PdhgResult {
  Vector beta;
  Vector v;
  PdhgReport report;
  SaddleState state() const { return {beta, v, tau, sigma}; }
  double tau = 0.0;
  double sigma = 0.0;
};

struct ConvexityCheck {
  bool ok = false;
  bool by_construction = false;        // default B with alpha <= 1
  std::optional<double> min_eigenvalue;  // of X'X - lambda B'B (custom B only)
};

/// X'X >= lambda B'B. Holds by construction for the default B with
/// alpha <= 1; for a custom B'B the smallest eigenvalue of the difference is
/// computed.
ConvexityCheck check_convexity(const GroupedDesign& design,
                               const GmcConfig& cfg);

/// Spectral norm of a symmetric PSD operator by power iteration from the
/// normalized all-ones vector; relative tolerance 1e-6.
double spectral_norm(const std::function<Vector(const Vector&)>& apply,
                     Index p, int max_iterations = 5000);

/// Solves the group GMC problem via PDHG on its saddle-point form. Returns
/// the best iterate flagged non-converged when iterations run out; throws on
/// NaN divergence or a violated convexity condition.
PdhgResult pdhg_solve(const GroupedDesign& design, const Response& response,
                      const GmcConfig& cfg, const PdhgOptions& opts = {},
                      const std::optional<SaddleState>& warm = std::nullopt);
PdhgResult pdhg_solve(const ProblemOps& ops, const Response& response,
                      const PdhgOptions& opts = {},
                      const std::optional<SaddleState>& warm = std::nullopt);

/// The two inner subproblems of one PDHG iteration, as FBS problems.
/// beta step: argmin (1/2n)||y-Xb||^2 - 1/2 b'Zb + (1/2tau)||b-target||^2
///                   + lambda sum_j K_j ||b_j||
/// v step:    argmin 1/2 w'Zw + (1/2sigma)||w-target||^2
///                   + lambda sum_j K_j ||w_j||
/// xty_n is X'y/n. Exposed so diagnostics can probe the exact oracles the
/// solver iterates on.
FbsProblem beta_update_problem(const ProblemOps& ops, const Vector& xty_n,
                               const Vector& target, double tau,
                               const Vector& start);
FbsProblem v_update_problem(const ProblemOps& ops, const Vector& target,
                            double sigma, const Vector& start);

/// Blockwise violation of the first-order saddle conditions at (beta, v):
/// max over groups of the distance from the negative smooth gradient block to
/// the subdifferential of lambda K_j ||.||_2. Zero at an exact saddle.
double kkt_residual(const Vector& beta, const Vector& v,
                    const GroupedDesign& design, const Response& response,
                    const GmcConfig& cfg);
double kkt_residual(const Vector& beta, const Vector& v,
                    const ProblemOps& ops, const Response& response);

}  // namespace ggmc
