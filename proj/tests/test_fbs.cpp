#include <doctest.h>

#include <Eigen/QR>
#include <cmath>

#include "ggmc/fbs.hpp"
#include "ggmc/prox.hpp"
#include "ggmc/rng.hpp"
#include "oracles.hpp"

using namespace ggmc;

namespace {

FbsProblem quadratic_to(const Vector& a) {
  FbsProblem prob;
  prob.x0 = Vector::Zero(a.size());
  prob.gradient = [a](const Vector& x) { return (x - a).eval(); };
  prob.smooth_value = [a](const Vector& x) { return 0.5 * (x - a).squaredNorm(); };
  prob.nonsmooth_value = [](const Vector&) { return 0.0; };
  prob.prox = [](const Vector& u, double) { return u; };
  return prob;
}

}  // namespace

TEST_CASE("fbs reaches the fixed point of a plain quadratic") {
  Vector a(3);
  a << 1.0, -2.0, 0.5;
  auto [x, report] = fbs_solve(quadratic_to(a));
  CHECK((x - a).norm() <= 1e-7);
  CHECK(report.iterations <= 25);
}

TEST_CASE("fbs with a group norm reproduces the prox") {
  // argmin 1/2||x-u||^2 + t ||x||_2 is exactly one block-soft-threshold.
  Vector u(3);
  u << 3.0, 0.0, 4.0;
  const double t = 2.5;
  std::vector<GroupInfo> one{{0, 3, 1.0, "g"}};

  FbsProblem prob;
  prob.x0 = Vector::Zero(3);
  prob.gradient = [&](const Vector& x) { return (x - u).eval(); };
  prob.smooth_value = [&](const Vector& x) { return 0.5 * (x - u).squaredNorm(); };
  prob.nonsmooth_value = [&](const Vector& x) { return t * x.norm(); };
  prob.prox = [&](const Vector& w, double step) {
    return prox_group_l2(w, {{step * t}}, one);
  };
  auto [x, report] = fbs_solve(prob);
  (void)report;
  const Vector expect = prox_group_l2(u, {{t}}, one);
  CHECK((x - expect).norm() <= 1e-8);
}

namespace {

// The beta-update subproblem with orthonormal columns (X'X = n I) has the
// closed form: block-soft-threshold of the unpenalized minimizer.
struct OrthonormalCase {
  Matrix X;
  Vector y, beta_hat;
  double tau = 0.8, lambda = 0.3, alpha = 0.0;
  std::vector<GroupInfo> groups{{0, 2, std::sqrt(2.0), "a"}, {2, 2, std::sqrt(2.0), "b"}};

  OrthonormalCase() {
    const Index n = 8, p = 4;
    Matrix M(n, p);
    CounterRng rng(31);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) M(i, j) = rng.normal();
    // Orthonormalize and rescale so X'X = n I.
    const auto qr = M.householderQr();
    X = Matrix(qr.householderQ()) .leftCols(p) * std::sqrt(static_cast<double>(n));
    y.resize(n);
    for (Index i = 0; i < n; ++i) y[i] = rng.normal();
    beta_hat.resize(p);
    for (Index j = 0; j < p; ++j) beta_hat[j] = rng.normal();
  }

  Vector closed_form() const {
    const double n = static_cast<double>(X.rows());
    const Vector xty_n = X.transpose() * y / n;
    // m(b) = 1/2 |b|^2 - xty'b + (1/2tau)|b - beta_hat|^2 (+const)
    const double a = 1.0 + 1.0 / tau;
    const Vector center = (xty_n + beta_hat / tau) / a;
    Vector out(center.size());
    for (const auto& g : groups) {
      const auto c = center.segment(g.start, g.size);
      const double t = lambda * g.weight / a;
      const double norm = c.norm();
      out.segment(g.start, g.size) =
          norm <= t ? Vector::Zero(g.size).eval() : ((1.0 - t / norm) * c).eval();
    }
    return out;
  }

  FbsProblem problem() const {
    const double n = static_cast<double>(X.rows());
    const Matrix gram = X.transpose() * X / n;
    const Vector xty_n = X.transpose() * y / n;
    FbsProblem prob;
    prob.x0 = Vector::Zero(X.cols());
    prob.gradient = [=, this](const Vector& b) {
      return (gram * b - xty_n + (b - beta_hat) / tau).eval();
    };
    prob.smooth_value = [=, this](const Vector& b) {
      return 0.5 * b.dot(gram * b) - xty_n.dot(b) +
             (b - beta_hat).squaredNorm() / (2.0 * tau);
    };
    prob.nonsmooth_value = [this](const Vector& b) {
      double s = 0.0;
      for (const auto& g : groups) s += g.weight * b.segment(g.start, g.size).norm();
      return lambda * s;
    };
    prob.prox = [this](const Vector& u, double t) {
      return prox_group_l2(u, GroupThresholds::scaled(groups, t * lambda), groups);
    };
    return prob;
  }
};

}  // namespace

TEST_CASE("fbs solves the orthonormal beta update to its closed form") {
  OrthonormalCase c;
  REQUIRE((c.X.transpose() * c.X - 8.0 * Matrix::Identity(4, 4)).norm() <= 1e-10);
  auto [x, report] = fbs_solve(c.problem());
  (void)report;
  CHECK((x - c.closed_form()).norm() <= 1e-6);
}

TEST_CASE("fbs solution satisfies the prox fixed-point equation") {
  OrthonormalCase c;
  auto prob = c.problem();
  auto [x, report] = fbs_solve(prob);
  (void)report;
  const double t = 0.05;
  const Vector again = prob.prox(x - t * prob.gradient(x), t);
  CHECK((again - x).norm() <= 1e-6 * (1.0 + x.norm()));
}

TEST_CASE("supplied gradients match finite differences") {
  OrthonormalCase c;
  auto prob = c.problem();
  CounterRng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    Vector x(4);
    for (int i = 0; i < 4; ++i) x[i] = 2.0 * rng.normal();
    const double h = 1e-6 * std::max(1.0, x.norm());
    const Vector fd = oracle::finite_diff_gradient(prob.smooth_value, x, h);
    const Vector g = prob.gradient(x);
    CHECK((fd - g).norm() <= 1e-5 * (1.0 + g.norm()));
  }
}

TEST_CASE("fbs is start-independent on strongly convex problems") {
  OrthonormalCase c;
  auto prob = c.problem();
  CounterRng rng(13);
  Vector ref;
  for (int rep = 0; rep < 3; ++rep) {
    for (Index i = 0; i < prob.x0.size(); ++i) prob.x0[i] = 5.0 * rng.normal();
    auto [x, report] = fbs_solve(prob);
    (void)report;
    if (rep == 0)
      ref = x;
    else
      CHECK((x - ref).norm() <= 1e-6);
  }
}

TEST_CASE("fbs objective is non-increasing up to the window") {
  OrthonormalCase c;
  auto [x, report] = fbs_solve(c.problem());
  (void)x;
  const auto& trace = report.objective_trace;
  REQUIRE(trace.size() >= 2);
  for (std::size_t k = 1; k < trace.size(); ++k) {
    double window_max = trace[k - 1];
    for (std::size_t b = (k >= 10 ? k - 10 : 0); b < k; ++b)
      window_max = std::max(window_max, trace[b]);
    CHECK(trace[k] <= window_max + 1e-9 * (1.0 + std::abs(window_max)));
  }
}

TEST_CASE("fbs error modes") {
  SUBCASE("max iterations exhausted carries the residual") {
    Vector a = Vector::Constant(3, 4.0);
    auto prob = quadratic_to(a);
    FbsOptions opts;
    opts.max_iterations = 2;
    opts.tolerance = 1e-16;
    CHECK_THROWS_AS(fbs_solve(prob, opts), ConvergenceError);
  }
  SUBCASE("NaN gradient reports divergence") {
    FbsProblem prob;
    prob.x0 = Vector::Zero(2);
    prob.gradient = [](const Vector& x) {
      return (x.array() * std::numeric_limits<double>::quiet_NaN()).matrix().eval();
    };
    prob.smooth_value = [](const Vector&) { return 1.0; };
    prob.nonsmooth_value = [](const Vector&) { return 0.0; };
    prob.prox = [](const Vector& u, double) { return u; };
    CHECK_THROWS_AS(fbs_solve(prob), DivergenceError);
  }
}
