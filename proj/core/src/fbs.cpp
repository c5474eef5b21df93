#include "ggmc/fbs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "ggmc/rng.hpp"

namespace ggmc {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw DivergenceError(std::string("divergence: ") + what);
}

// Two-point secant estimate of the gradient Lipschitz constant around x0.
double estimate_lipschitz(const FbsProblem& problem) {
  CounterRng rng(0x9e3779b9u);  // fixed seed keeps solves deterministic
  const Index n = problem.x0.size();
  Vector a(n), b(n);
  const double scale = std::max(1.0, problem.x0.norm());
  for (Index i = 0; i < n; ++i) {
    a[i] = problem.x0[i] + 0.01 * scale * rng.normal();
    b[i] = problem.x0[i] + 0.01 * scale * rng.normal();
  }
  const double dx = (a - b).norm();
  if (dx == 0.0) return 0.0;
  return (problem.gradient(a) - problem.gradient(b)).norm() / dx;
}

}  // namespace

std::pair<Vector, FbsReport> fbs_solve(const FbsProblem& problem,
                                       const FbsOptions& opts) {
  if (opts.tolerance <= 0.0) throw ValidationError("fbs tolerance must be > 0");
  if (opts.window < 1) throw ValidationError("fbs window must be >= 1");

  Vector x = problem.x0;
  require_finite(x, "initial point");
  Vector grad = problem.gradient(x);
  require_finite(grad, "gradient at initial point");

  double t = opts.initial_step;
  if (t <= 0.0) {
    const double lip = estimate_lipschitz(problem);
    t = lip > 0.0 ? 1.0 / lip : 1.0;
  }

  double m_val = problem.smooth_value(x);
  double obj = m_val + problem.nonsmooth_value(x);
  std::deque<double> m_history{m_val};

  FbsReport report;
  report.objective_trace.push_back(obj);

  int objective_ok_streak = 0;
  for (int k = 0; k < opts.max_iterations; ++k) {
    const double m_ref = *std::max_element(m_history.begin(), m_history.end());

    // Backtracking on the FASTA majorization condition.
    Vector x_new, dx;
    double m_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = problem.prox(x - t * grad, t);
      require_finite(x_new, "prox output");
      dx = x_new - x;
      m_new = problem.smooth_value(x_new);
      if (std::isnan(m_new)) throw DivergenceError("divergence: objective is NaN");
      const double bound = m_ref + grad.dot(dx) + dx.squaredNorm() / (2.0 * t) +
                           1e-12 * (1.0 + std::abs(m_ref));
      if (m_new <= bound) {
        accepted = true;
        break;
      }
      t *= opts.shrink;
    }
    if (!accepted)
      throw ConvergenceError("fbs line search failed to find a usable stepsize",
                             report.residual);

    Vector grad_new = problem.gradient(x_new);
    require_finite(grad_new, "gradient");

    // Fixed-point residual: element of the composite subdifferential at x_new.
    const Vector h_part = (x - x_new) / t - grad;
    const double raw = (h_part + grad_new).norm();
    const double scale = std::max(grad_new.norm(), h_part.norm()) + 1e-30;
    report.residual = raw / scale;
    report.step = t;
    report.iterations = k + 1;

    const double obj_new = m_new + problem.nonsmooth_value(x_new);
    const bool obj_flat =
        std::abs(obj_new - obj) <= opts.tolerance * (1.0 + std::abs(obj_new));
    objective_ok_streak = obj_flat ? objective_ok_streak + 1 : 0;
    report.objective_trace.push_back(obj_new);

    // Spectral stepsize for the next iteration (adaptive BB pair).
    const Vector dg = grad_new - grad;
    const double sy = dx.dot(dg);
    if (sy > 0.0) {
      const double tau_s = dx.squaredNorm() / sy;
      const double tau_m = sy / dg.squaredNorm();
      t = (tau_m / tau_s > 0.5) ? tau_m : tau_s - 0.5 * tau_m;
      if (!(t > 0.0) || !std::isfinite(t)) t = tau_s;
    }

    x.swap(x_new);
    grad.swap(grad_new);
    obj = obj_new;
    m_val = m_new;
    m_history.push_back(m_val);
    if (static_cast<int>(m_history.size()) > opts.window) m_history.pop_front();

    if (report.residual <= opts.tolerance && objective_ok_streak >= 3)
      return {std::move(x), std::move(report)};
  }

  throw ConvergenceError("fbs did not converge in " +
                             std::to_string(opts.max_iterations) +
                             " iterations (residual " +
                             std::to_string(report.residual) + ")",
                         report.residual);
}

}  // namespace ggmc
