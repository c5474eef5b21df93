#include "ggmc/penalties.hpp"

#include <cmath>

#include "ggmc/prox.hpp"

namespace ggmc {

void GmcConfig::validate(Index p) const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("alpha must lie in [0,1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda must be finite and >= 0");
  if (custom_btb) {
    if (custom_btb->rows() != p || custom_btb->cols() != p)
      throw ValidationError("custom B'B must be p x p");
    if (!custom_btb->isApprox(custom_btb->transpose(), 1e-10))
      throw ValidationError("custom B'B must be symmetric");
  }
}

ProblemOps::ProblemOps(const GroupedDesign& design, const GmcConfig& cfg)
    : design_(&design), cfg_(cfg) {
  cfg_.validate(design.p());
  const bool cache = cfg_.gram_mode == GramMode::explicit_gram ||
                     (cfg_.gram_mode == GramMode::auto_select &&
                      design.p() <= 2000);
  if (cache)
    gram_ = std::make_shared<const Matrix>(design.X().transpose() * design.X() /
                                           static_cast<double>(design.n()));
}

ProblemOps ProblemOps::with_lambda(double lambda) const {
  ProblemOps out = *this;
  out.cfg_.lambda = lambda;
  return out;
}

Vector ProblemOps::apply_gram(const Vector& v) const {
  if (gram_cached()) return *gram_ * v;
  return design_->X().transpose() * (design_->X() * v) /
         static_cast<double>(design_->n());
}

Vector ProblemOps::apply_z(const Vector& v) const {
  if (cfg_.has_custom_b())
    return (cfg_.lambda / static_cast<double>(design_->n())) *
           (*cfg_.custom_btb * v);
  if (cfg_.alpha == 0.0) return Vector::Zero(v.size());
  return cfg_.alpha * apply_gram(v);
}

bool ProblemOps::z_is_zero() const {
  if (cfg_.has_custom_b())
    return cfg_.lambda == 0.0 || cfg_.custom_btb->isZero(0.0);
  return cfg_.alpha == 0.0;
}

double huber(double beta) {
  const double a = std::abs(beta);
  return a <= 1.0 ? 0.5 * beta * beta : a - 0.5;
}

double scaled_huber(double beta, double b) {
  if (b == 0.0) return 0.0;
  const double b2 = b * b;
  return huber(b2 * beta) / b2;
}

double scaled_mc(double beta, double b) {
  return std::abs(beta) - scaled_huber(beta, b);
}

double mcp_value(double beta, const McpRef& ref) {
  if (!(ref.gamma > 1.0)) throw ValidationError("mcp gamma must be > 1");
  if (!(ref.lambda >= 0.0)) throw ValidationError("mcp lambda must be >= 0");
  const double a = std::abs(beta);
  if (a <= ref.gamma * ref.lambda)
    return ref.lambda * a - beta * beta / (2.0 * ref.gamma);
  return 0.5 * ref.gamma * ref.lambda * ref.lambda;
}

FbsOptions penalty_fbs_options() {
  FbsOptions opts;
  opts.max_iterations = 5000;
  opts.tolerance = 1e-10;
  return opts;
}

double group_norm(const Vector& beta, const GroupedDesign& design) {
  double s = 0.0;
  for (const auto& g : design.groups())
    s += g.weight * beta.segment(g.start, g.size).norm();
  return s;
}

namespace {

// min_v { weight_scale * sum_j K_j ||v_j|| + 1/2 (beta - v)' M (beta - v) }
// for the symmetric PSD map M. Attained value; v starts at zero.
double inner_minimum(const Vector& beta,
                     const std::function<Vector(const Vector&)>& apply_m,
                     double weight_scale, const GroupedDesign& design,
                     const FbsOptions& opts) {
  const auto& groups = design.groups();
  const auto weighted_norm = [&](const Vector& v) {
    double s = 0.0;
    for (const auto& g : groups)
      s += weight_scale * g.weight * v.segment(g.start, g.size).norm();
    return s;
  };

  FbsProblem prob;
  prob.x0 = Vector::Zero(beta.size());
  prob.gradient = [&](const Vector& v) { return apply_m(v - beta); };
  prob.smooth_value = [&](const Vector& v) {
    Vector d = beta - v;
    return 0.5 * d.dot(apply_m(d));
  };
  prob.nonsmooth_value = weighted_norm;
  prob.prox = [&](const Vector& u, double t) {
    return prox_group_l2(u, GroupThresholds::scaled(groups, t * weight_scale),
                         groups);
  };

  auto [v, report] = fbs_solve(prob, opts);
  return weighted_norm(v) + prob.smooth_value(v);
}

}  // namespace

double scaled_gen_huber(const Vector& beta, const ProblemOps& ops,
                        const FbsOptions& opts) {
  if (beta.size() != ops.design().p())
    throw ValidationError("beta length does not match design");
  if (ops.z_is_zero() || beta.isZero(0.0)) return 0.0;
  return inner_minimum(
      beta, [&](const Vector& v) { return ops.apply_z(v); },
      ops.config().lambda, ops.design(), opts);
}

double group_gen_huber(const Vector& beta, const ProblemOps& ops,
                       const FbsOptions& opts) {
  if (beta.size() != ops.design().p())
    throw ValidationError("beta length does not match design");
  const GmcConfig& cfg = ops.config();
  if (beta.isZero(0.0)) return 0.0;
  if (cfg.has_custom_b()) {
    const double n = static_cast<double>(ops.design().n());
    return inner_minimum(
        beta, [&](const Vector& v) { return (*cfg.custom_btb * v) / n; }, 1.0,
        ops.design(), opts);
  }
  if (cfg.alpha == 0.0) return 0.0;
  if (cfg.lambda <= 0.0)
    throw ValidationError(
        "generalized Huber term with the default B requires lambda > 0");
  return scaled_gen_huber(beta, ops, opts) / cfg.lambda;
}

double group_gen_huber(const Vector& beta, const GroupedDesign& design,
                       const GmcConfig& cfg, const FbsOptions& opts) {
  return group_gen_huber(beta, ProblemOps(design, cfg), opts);
}

double group_gmc_penalty(const Vector& beta, const ProblemOps& ops,
                         const FbsOptions& opts) {
  return group_norm(beta, ops.design()) - group_gen_huber(beta, ops, opts);
}

double group_gmc_penalty(const Vector& beta, const GroupedDesign& design,
                         const GmcConfig& cfg, const FbsOptions& opts) {
  return group_gmc_penalty(beta, ProblemOps(design, cfg), opts);
}

double objective_value(const Vector& beta, const ProblemOps& ops,
                       const Response& response, const FbsOptions& opts) {
  const GroupedDesign& design = ops.design();
  if (beta.size() != design.p() || response.y.size() != design.n())
    throw ValidationError("objective_value: dimension mismatch");
  const double n = static_cast<double>(design.n());
  const double loss =
      (response.y - design.X() * beta).squaredNorm() / (2.0 * n);
  const double lam = ops.config().lambda;
  return loss + lam * group_norm(beta, design) -
         scaled_gen_huber(beta, ops, opts);
}

double objective_value(const Vector& beta, const GroupedDesign& design,
                       const Response& response, const GmcConfig& cfg,
                       const FbsOptions& opts) {
  return objective_value(beta, ProblemOps(design, cfg), response, opts);
}

}  // namespace ggmc
