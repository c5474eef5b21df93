#pragma once

#include <memory>
#include <optional>

#include "ggmc/fbs.hpp"
#include "ggmc/grouped_design.hpp"
#include "ggmc/types.hpp"

namespace ggmc {

enum class GramMode { auto_select, explicit_gram, operator_form };

/// Parameters of one group GMC fit. The default matrix choice ties B to the
/// design, B'B = (alpha/lambda) X'X, so the saddle operator
/// Z = (lambda/n) B'B = (alpha/n) X'X does not depend on lambda and the
/// objective is convex for every alpha in [0,1]. A custom B'B (p x p,
/// symmetric) overrides that choice; convexity is then the caller's problem
/// and can be checked with check_convexity().
struct GmcConfig {
  double alpha = 0.6;
  double lambda = 0.0;
  GramMode gram_mode = GramMode::auto_select;
  std::optional<Matrix> custom_btb;

  void validate(Index p) const;
  bool has_custom_b() const { return custom_btb.has_value(); }
};

/// Univariate MCP reference: rho_{lambda,gamma}.
struct McpRef {
  double lambda = 1.0;
  double gamma = 2.0;
};

/// The linear maps every solver and penalty evaluation shares:
///   apply_gram(v) = X'X v / n
///   apply_z(v)    = Z v,  Z = (lambda/n) B'B
/// The Gram matrix is cached when p <= 2000 (or when forced), otherwise both
/// maps go through X. With the default B the cache serves a whole lambda path.
class ProblemOps {
 public:
  ProblemOps(const GroupedDesign& design, const GmcConfig& cfg);

  /// Same design and caches, different lambda (cheap; the Gram cache is
  /// shared). Used when walking a lambda path.
  ProblemOps with_lambda(double lambda) const;

  Vector apply_gram(const Vector& v) const;
  Vector apply_z(const Vector& v) const;
  bool z_is_zero() const;

  const GroupedDesign& design() const { return *design_; }
  const GmcConfig& config() const { return cfg_; }
  bool gram_cached() const { return gram_ != nullptr; }
  const Matrix& gram() const { return *gram_; }

 private:
  const GroupedDesign* design_;
  GmcConfig cfg_;
  std::shared_ptr<const Matrix> gram_;  // X'X / n when cached
};

// Scalar penalty family.
double huber(double beta);
double scaled_huber(double beta, double b);
double scaled_mc(double beta, double b);
double mcp_value(double beta, const McpRef& ref);

/// FBS settings for penalty evaluation (a diagnostic path, not the fitting
/// hot path): tight tolerance, generous iteration budget.
FbsOptions penalty_fbs_options();

/// Generalized Huber term of the group GMC penalty:
///   H_B(beta) = min_v { sum_j K_j ||v_j|| + (1/2n) ||B(beta - v)||^2 },
/// computed by FBS. Exactly 0 when alpha = 0 or beta = 0.
double group_gen_huber(const Vector& beta, const ProblemOps& ops,
                       const FbsOptions& opts = penalty_fbs_options());
double group_gen_huber(const Vector& beta, const GroupedDesign& design,
                       const GmcConfig& cfg,
                       const FbsOptions& opts = penalty_fbs_options());

/// Group GMC penalty Phi_B(beta) = sum_j K_j ||beta_j|| - H_B(beta).
double group_gmc_penalty(const Vector& beta, const ProblemOps& ops,
                         const FbsOptions& opts = penalty_fbs_options());
double group_gmc_penalty(const Vector& beta, const GroupedDesign& design,
                         const GmcConfig& cfg,
                         const FbsOptions& opts = penalty_fbs_options());

/// Scaled inner minimum min_v { lambda sum_j K_j ||v_j|| + 1/2 (beta-v)'Z(beta-v) },
/// equal to lambda * H_B(beta) and well defined at lambda = 0.
double scaled_gen_huber(const Vector& beta, const ProblemOps& ops,
                        const FbsOptions& opts = penalty_fbs_options());

/// Full objective F(beta) = (1/2n)||y - X beta||^2 + lambda Phi_B(beta).
double objective_value(const Vector& beta, const GroupedDesign& design,
                       const Response& response, const GmcConfig& cfg,
                       const FbsOptions& opts = penalty_fbs_options());
double objective_value(const Vector& beta, const ProblemOps& ops,
                       const Response& response,
                       const FbsOptions& opts = penalty_fbs_options());

/// Group-Lasso part sum_j K_j ||beta_j||.
double group_norm(const Vector& beta, const GroupedDesign& design);

}  // namespace ggmc
