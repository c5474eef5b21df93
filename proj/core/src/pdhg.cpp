#include "ggmc/pdhg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "ggmc/prox.hpp"

namespace ggmc {

ConvexityCheck check_convexity(const GroupedDesign& design,
                               const GmcConfig& cfg) {
  cfg.validate(design.p());
  ConvexityCheck out;
  if (!cfg.has_custom_b()) {
    // lambda B'B = alpha X'X, so X'X - lambda B'B = (1-alpha) X'X >= 0.
    out.ok = true;
    out.by_construction = true;
    return out;
  }
  const Matrix xtx = design.X().transpose() * design.X();
  const Matrix diff = xtx - cfg.lambda * (*cfg.custom_btb);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(diff, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  const double scale = std::max(1.0, xtx.cwiseAbs().maxCoeff());
  out.ok = min_eig >= -1e-10 * scale;
  out.min_eigenvalue = min_eig;
  return out;
}

double spectral_norm(const std::function<Vector(const Vector&)>& apply,
                     Index p, int max_iterations) {
  if (p <= 0) throw ValidationError("operator dimension must be positive");
  Vector x = Vector::Ones(p) / std::sqrt(static_cast<double>(p));
  double estimate = 0.0;
  for (int k = 0; k < max_iterations; ++k) {
    Vector y = apply(x);
    if (!y.allFinite()) throw DivergenceError("spectral_norm: operator produced NaN");
    double norm = y.norm();
    if (norm == 0.0) {
      if (k > 0) return estimate;
      // All-ones start annihilated; deterministic fallback direction.
      for (Index i = 0; i < p; ++i) x[i] = std::sin(static_cast<double>(i) + 1.0);
      x.normalize();
      y = apply(x);
      norm = y.norm();
      if (norm == 0.0) return 0.0;
    }
    const double prev = estimate;
    estimate = norm;
    x = y / norm;
    if (k > 0 && std::abs(estimate - prev) <= 1e-6 * estimate) return estimate;
  }
  throw ConvergenceError("spectral_norm power iteration did not converge",
                         estimate);
}

namespace {

Vector gram_minus_z(const ProblemOps& ops, const Vector& b) {
  const GmcConfig& cfg = ops.config();
  if (!cfg.has_custom_b()) {
    if (cfg.alpha == 1.0) return Vector::Zero(b.size());
    return (1.0 - cfg.alpha) * ops.apply_gram(b);
  }
  return ops.apply_gram(b) - ops.apply_z(b);
}

void attach_group_norm(FbsProblem& prob, const ProblemOps& ops) {
  const auto& groups = ops.design().groups();
  const double lam = ops.config().lambda;
  prob.nonsmooth_value = [&groups, lam](const Vector& x) {
    double s = 0.0;
    for (const auto& g : groups) s += g.weight * x.segment(g.start, g.size).norm();
    return lam * s;
  };
  prob.prox = [&groups, lam](const Vector& u, double t) {
    return prox_group_l2(u, GroupThresholds::scaled(groups, t * lam), groups);
  };
}

}  // namespace

FbsProblem beta_update_problem(const ProblemOps& ops, const Vector& xty_n,
                               const Vector& target, double tau,
                               const Vector& start) {
  FbsProblem prob;
  prob.x0 = start;
  prob.gradient = [&ops, xty_n, target, tau](const Vector& b) {
    return (gram_minus_z(ops, b) - xty_n + (b - target) / tau).eval();
  };
  prob.smooth_value = [&ops, xty_n, target, tau](const Vector& b) {
    return 0.5 * b.dot(gram_minus_z(ops, b)) - xty_n.dot(b) +
           (b - target).squaredNorm() / (2.0 * tau);
  };
  attach_group_norm(prob, ops);
  return prob;
}

FbsProblem v_update_problem(const ProblemOps& ops, const Vector& target,
                            double sigma, const Vector& start) {
  FbsProblem prob;
  prob.x0 = start;
  prob.gradient = [&ops, target, sigma](const Vector& w) {
    return (ops.apply_z(w) + (w - target) / sigma).eval();
  };
  prob.smooth_value = [&ops, target, sigma](const Vector& w) {
    return 0.5 * w.dot(ops.apply_z(w)) +
           (w - target).squaredNorm() / (2.0 * sigma);
  };
  attach_group_norm(prob, ops);
  return prob;
}

namespace {

struct InnerSolves {
  const ProblemOps& ops;
  Vector xty_n;  // X'y / n
  FbsOptions fbs_opts;
  double beta_step = 0.0;  // reuse the accepted stepsize across outer iterations
  double v_step = 0.0;
  long total_iterations = 0;

  InnerSolves(const ProblemOps& o, const Response& response,
              const PdhgOptions& opts)
      : ops(o) {
    const auto& d = ops.design();
    xty_n = d.X().transpose() * response.y / static_cast<double>(d.n());
    fbs_opts.tolerance =
        opts.inner_tolerance.value_or(std::max(0.1 * opts.tolerance, 1e-10));
    fbs_opts.max_iterations = opts.inner_max_iterations;
  }

  Vector update_beta(const Vector& target, double tau, const Vector& start) {
    FbsProblem prob = beta_update_problem(ops, xty_n, target, tau, start);
    FbsOptions o = fbs_opts;
    o.initial_step = beta_step;
    auto [b, report] = fbs_solve(prob, o);
    beta_step = report.step;
    total_iterations += report.iterations;
    return b;
  }

  Vector update_v(const Vector& target, double sigma, const Vector& start) {
    FbsProblem prob = v_update_problem(ops, target, sigma, start);
    FbsOptions o = fbs_opts;
    o.initial_step = v_step;
    auto [w, report] = fbs_solve(prob, o);
    v_step = report.step;
    total_iterations += report.iterations;
    return w;
  }
};

}  // namespace

PdhgResult pdhg_solve(const ProblemOps& ops, const Response& response,
                      const PdhgOptions& opts,
                      const std::optional<SaddleState>& warm) {
  const GroupedDesign& design = ops.design();
  const GmcConfig& cfg = ops.config();
  if (response.y.size() != design.n())
    throw ValidationError("response length does not match design rows");
  if (opts.tolerance <= 0.0) throw ValidationError("pdhg tolerance must be > 0");

  const auto convexity = check_convexity(design, cfg);
  if (!convexity.ok)
    throw ValidationError(
        "convexity condition X'X >= lambda B'B violated (min eigenvalue " +
        std::to_string(convexity.min_eigenvalue.value_or(0.0)) + ")");

  const Index p = design.p();
  PdhgResult result;
  result.report.uniqueness_guaranteed =
      cfg.has_custom_b()
          ? convexity.min_eigenvalue.value_or(0.0) > 0.0
          : (design.n() > p && cfg.alpha < 1.0);
  if (!result.report.uniqueness_guaranteed)
    result.report.note = "uniqueness not guaranteed";

  double tau, sigma;
  if (warm && warm->tau > 0.0 && warm->sigma > 0.0) {
    tau = warm->tau;
    sigma = warm->sigma;
  } else {
    const double z_norm =
        spectral_norm([&](const Vector& x) { return ops.apply_z(x); }, p);
    const double base =
        z_norm > 1e-30 ? std::sqrt(opts.step_product) / z_norm : 1e6;
    tau = sigma = base;
  }

  Vector beta = warm ? warm->beta : Vector::Zero(p);
  Vector v = warm ? warm->v : Vector::Zero(p);
  if (warm && (beta.size() != p || v.size() != p))
    throw ValidationError("warm state dimension mismatch");

  InnerSolves inner(ops, response, opts);
  PdhgReport& report = result.report;

  for (int k = 0; k < opts.max_iterations; ++k) {
    Vector beta_new, v_new;
    try {
      const Vector beta_hat = beta - tau * ops.apply_z(v);
      beta_new = inner.update_beta(beta_hat, tau, beta);
      const Vector v_hat = v + sigma * ops.apply_z(2.0 * beta_new - beta);
      v_new = inner.update_v(v_hat, sigma, v);
    } catch (const ConvergenceError&) {
      report.iterations = k;
      report.converged = false;
      report.note = "inner solve exhausted its iteration budget";
      break;
    }
    if (!beta_new.allFinite() || !v_new.allFinite())
      throw DivergenceError("pdhg iterate contains NaN/Inf");

    const Vector dbeta = beta - beta_new;
    const Vector dv = v - v_new;
    const Vector z_dv = ops.apply_z(dv);
    const Vector z_dbeta = ops.apply_z(dbeta);
    report.primal_residual = (dbeta / tau - z_dv).norm();
    report.dual_residual = (dv / sigma - z_dbeta).norm();
    report.iterations = k + 1;

    beta = std::move(beta_new);
    v = std::move(v_new);

    const double scale = 1.0 + beta.norm();
    if (std::max(report.primal_residual, report.dual_residual) <=
        opts.tolerance * scale) {
      report.converged = true;
      break;
    }

    // Residual balancing: grow the stepsize of the lagging side, keeping the
    // product tau*sigma (and so the convergence condition) fixed.
    if (opts.adaptive && report.adaptations < opts.max_adaptations) {
      if (report.primal_residual > opts.balance_ratio * report.dual_residual) {
        tau /= opts.balance_factor;
        sigma *= opts.balance_factor;
        ++report.adaptations;
      } else if (report.dual_residual >
                 opts.balance_ratio * report.primal_residual) {
        sigma /= opts.balance_factor;
        tau *= opts.balance_factor;
        ++report.adaptations;
      }
    }
  }

  report.inner_iterations = inner.total_iterations;
  result.beta = std::move(beta);
  result.v = std::move(v);
  result.tau = tau;
  result.sigma = sigma;
  return result;
}

PdhgResult pdhg_solve(const GroupedDesign& design, const Response& response,
                      const GmcConfig& cfg, const PdhgOptions& opts,
                      const std::optional<SaddleState>& warm) {
  return pdhg_solve(ProblemOps(design, cfg), response, opts, warm);
}

namespace {

double block_subdiff_distance(const Vector& neg_grad_block,
                              const Vector& point_block, double threshold) {
  const double norm = point_block.norm();
  if (norm == 0.0)
    return std::max(0.0, neg_grad_block.norm() - threshold);
  return (neg_grad_block - threshold / norm * point_block).norm();
}

}  // namespace

double kkt_residual(const Vector& beta, const Vector& v,
                    const ProblemOps& ops, const Response& response) {
  const GroupedDesign& design = ops.design();
  if (beta.size() != design.p() || v.size() != design.p() ||
      response.y.size() != design.n())
    throw ValidationError("kkt_residual: dimension mismatch");
  const double n = static_cast<double>(design.n());
  const double lam = ops.config().lambda;

  // Stationarity in beta: -(X'(X beta - y)/n - Z beta + Z v) must lie in
  // lambda K_j d||.||(beta_j); in v: -(Z(v - beta)) in lambda K_j d||.||(v_j).
  const Vector grad_beta = design.X().transpose() * (design.X() * beta - response.y) / n -
                           ops.apply_z(beta) + ops.apply_z(v);
  const Vector grad_v = ops.apply_z(v - beta);

  double worst = 0.0;
  for (const auto& g : design.groups()) {
    const double t = lam * g.weight;
    worst = std::max(worst, block_subdiff_distance(-grad_beta.segment(g.start, g.size),
                                                   beta.segment(g.start, g.size), t));
    worst = std::max(worst, block_subdiff_distance(-grad_v.segment(g.start, g.size),
                                                   v.segment(g.start, g.size), t));
  }
  return worst;
}

double kkt_residual(const Vector& beta, const Vector& v,
                    const GroupedDesign& design, const Response& response,
                    const GmcConfig& cfg) {
  return kkt_residual(beta, v, ProblemOps(design, cfg), response);
}

}  // namespace ggmc
