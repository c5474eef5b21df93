// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failed criteria. Needs GGMC_CLI (path to the ggmc binary) for
// the determinism criterion; the birth-weight criterion runs only when
// GGMC_BIRTHWT_DIR points at a prepared fixture.

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ggmc/csv.hpp"
#include "ggmc/cv.hpp"
#include "ggmc/rng.hpp"
#include "ggmc/sim.hpp"
#include "oracles.hpp"

using namespace ggmc;
namespace fs = std::filesystem;

namespace {

struct Harness {
  int failures = 0;

  template <typename Fn>
  void criterion(int number, const std::string& label, Fn&& body) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
      detail = body();
      ok = true;
    } catch (const std::exception& e) {
      detail = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (!ok) ++failures;
    std::printf("%s  criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL",
                number, label.c_str(), secs, detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
  }
};

struct Fail : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw Fail(what);
}

std::string fmt(double x) { return csv::format_number(x); }

// KKT residuals of every converged solve from criteria 1-3, checked in 6.
std::vector<double> collected_kkt;

PdhgOptions tight_solver() {
  PdhgOptions opts;
  opts.tolerance = 1e-8;
  return opts;
}

// ---------------------------------------------------------------- criterion 1
std::string zero_threshold() {
  int instances = 0;
  struct Family {
    Index n, J;
    double alpha;
    bool saw_nonzero = false;
  };
  std::vector<Family> families;
  for (Index n : {20, 100})
    for (Index J : {3, 10})
      for (double alpha : {0.0, 0.5, 1.0}) families.push_back({n, J, alpha});

  std::uint64_t seed = 9000;
  while (instances < 50) {
    Family& fam = families[instances % families.size()];
    auto inst = oracle::random_instance(fam.n, fam.J, 2, seed++);
    GroupedDesign d(inst.X, inst.group_ids);
    Response y{inst.y};
    const double lmax = lambda_max(d, y);
    GmcConfig cfg;
    cfg.alpha = fam.alpha;

    cfg.lambda = 1.01 * lmax;
    auto above = pdhg_solve(d, y, cfg, tight_solver());
    require(above.report.converged, "solve above lambda_max did not converge");
    require(above.beta.lpNorm<Eigen::Infinity>() <= 1e-8,
            "nonzero solution above lambda_max (sup " +
                fmt(above.beta.lpNorm<Eigen::Infinity>()) + ")");
    collected_kkt.push_back(kkt_residual(above.beta, above.v, d, y, cfg));

    cfg.lambda = 0.99 * lmax;
    auto below = pdhg_solve(d, y, cfg, tight_solver());
    if (below.report.converged) {
      collected_kkt.push_back(kkt_residual(below.beta, below.v, d, y, cfg));
      if (below.beta.lpNorm<Eigen::Infinity>() > 1e-8) fam.saw_nonzero = true;
    }
    ++instances;
  }
  for (const auto& fam : families)
    require(fam.saw_nonzero,
            "no nonzero fit just below lambda_max in family n=" +
                std::to_string(fam.n) + " J=" + std::to_string(fam.J) +
                " alpha=" + fmt(fam.alpha));
  return "50 instances, 12 configuration families";
}

// ---------------------------------------------------------------- criterion 2
std::string convex_oracle_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index n = 20 + 5 * static_cast<Index>(seed % 4);
    const Index J = 3 + static_cast<Index>(seed % 3);
    auto inst = oracle::random_instance(n, J, 2, 9500 + seed);
    GroupedDesign d(inst.X, inst.group_ids);
    Response y{inst.y};
    GmcConfig cfg;
    cfg.alpha = 0.0;
    cfg.lambda = (0.1 + 0.05 * static_cast<double>(seed % 5)) * lambda_max(d, y);
    auto res = pdhg_solve(d, y, cfg, tight_solver());
    require(res.report.converged, "pdhg did not converge");
    collected_kkt.push_back(kkt_residual(res.beta, res.v, d, y, cfg));
    const Vector ref =
        oracle::group_lasso_ista(d.X(), y.y, d.groups(), cfg.lambda, 1e-12);
    const double rel = (res.beta - ref).norm() / (1.0 + ref.norm());
    worst = std::max(worst, rel);
  }
  require(worst <= 1e-4, "worst relative error " + fmt(worst));
  return "20 instances, worst relative error " + fmt(worst);
}

// ---------------------------------------------------------------- criterion 3
std::string brute_force_optimality() {
  double worst_gap = -1e300;
  for (double alpha : {0.5, 1.0}) {
    for (std::uint64_t draw = 0; draw < 5; ++draw) {
      auto inst = oracle::random_instance(6, 1, 2, 9900 + draw, 1, 0.2);
      GroupedDesign d(inst.X, inst.group_ids);
      Response y{inst.y};
      GmcConfig cfg;
      cfg.alpha = alpha;
      cfg.lambda = 0.3 * lambda_max(d, y);

      auto res = pdhg_solve(d, y, cfg, tight_solver());
      require(res.report.converged, "pdhg did not converge");
      require(res.beta.lpNorm<Eigen::Infinity>() < 3.0,
              "solution escaped the grid box");
      collected_kkt.push_back(kkt_residual(res.beta, res.v, d, y, cfg));

      const double n = static_cast<double>(d.n());
      const Matrix Z = alpha / n * (d.X().transpose() * d.X());
      oracle::InnerMinExact inner(Z, cfg.lambda * d.group(0).weight);
      const Matrix gram = d.X().transpose() * d.X() / n;
      const Vector xty_n = d.X().transpose() * y.y / n;
      const double y2 = y.y.squaredNorm() / (2.0 * n);
      const double lamK = cfg.lambda * d.group(0).weight;
      const double g00 = gram(0, 0), g01 = gram(0, 1), g11 = gram(1, 1);
      auto objective = [&](double b0, double b1) {
        return y2 - (xty_n[0] * b0 + xty_n[1] * b1) +
               0.5 * (g00 * b0 * b0 + 2.0 * g01 * b0 * b1 + g11 * b1 * b1) +
               lamK * std::sqrt(b0 * b0 + b1 * b1) - inner.value(b0, b1);
      };

      double grid_min = std::numeric_limits<double>::infinity();
      for (double a = -3.0; a <= 3.0 + 1e-12; a += 1e-3) {
        for (double c = -3.0; c <= 3.0 + 1e-12; c += 1e-3) {
          const double val = objective(a, c);
          if (val < grid_min) grid_min = val;
        }
      }
      const double gap = objective(res.beta[0], res.beta[1]) - grid_min;
      worst_gap = std::max(worst_gap, gap);
      require(gap <= 1e-3, "objective gap " + fmt(gap) + " at alpha " + fmt(alpha));
    }
  }
  return "10 instances, worst objective gap " + fmt(worst_gap);
}

// ---------------------------------------------------------------- criterion 4
std::string penalty_correctness() {
  // (a) 1-d group GMC vs the analytic scaled MC value.
  {
    Matrix X(4, 1);
    X << 1, -1, 2, 0.5;
    GroupedDesign d(X, {"g"}, {"x1"}, std::vector<double>{1.0});
    const double b = 1.2;
    GmcConfig cfg;
    cfg.lambda = 1.0;
    cfg.custom_btb = Matrix::Constant(1, 1, b * b);
    const double b_adj = b / std::sqrt(static_cast<double>(d.n()));
    for (double beta = -3.0; beta <= 3.0 + 1e-12; beta += 0.01) {
      Vector v(1);
      v << beta;
      const double got = group_gmc_penalty(v, d, cfg);
      const double expect = scaled_mc(beta, b_adj);
      require(std::abs(got - expect) <= 1e-8,
              "1-d penalty mismatch " + fmt(got - expect) + " at beta " + fmt(beta));
    }
  }
  // (b) closed-form v* of the identity-B choice vs the FBS solution.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = oracle::random_instance(24, 3, 2, 10300 + seed);
    GroupedDesign d(inst.X, inst.group_ids);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(d.X().transpose() * d.X(),
                                              Eigen::EigenvaluesOnly);
    const double eta = eig.eigenvalues().minCoeff();
    require(eta > 0.0, "instance not positive definite");
    const double lambda = 0.05;
    CounterRng rng(seed);
    Vector beta_star = Vector::Zero(d.p());
    for (const auto& g : d.groups())
      if (rng.uniform() < 0.7)
        for (Index k = 0; k < g.size; ++k)
          beta_star[g.start + k] = 2.0 * rng.normal();
    auto diag = theory_diagnostics(d, beta_star, btb_identity(d.p(), eta, lambda));
    auto closed = oracle::identity_b_closed_form(d, beta_star, eta, lambda);
    require((diag.v_star - closed.v_star).norm() <=
                1e-6 * (1.0 + closed.v_star.norm()),
            "v* mismatch " + fmt((diag.v_star - closed.v_star).norm()));
  }
  // (c) lambda * Phi_B vs the MCP under the diagonal correspondence.
  {
    Matrix X(5, 1);
    X << 0.5, -1, 1.5, 2, -0.3;
    GroupedDesign d(X, {"g"}, {"x1"}, std::vector<double>{1.0});
    McpRef ref{0.7, 2.5};
    GmcConfig cfg;
    cfg.lambda = ref.lambda;
    cfg.custom_btb = Matrix::Constant(
        1, 1, static_cast<double>(d.n()) / (ref.gamma * ref.lambda));
    for (double beta = -3.0; beta <= 3.0 + 1e-12; beta += 0.01) {
      Vector v(1);
      v << beta;
      const double got = cfg.lambda * group_gmc_penalty(v, d, cfg);
      require(std::abs(got - mcp_value(beta, ref)) <= 1e-8,
              "MCP mismatch at beta " + fmt(beta));
    }
  }
  return "scaled-MC grid, 10 closed-form v* instances, MCP grid";
}

// ---------------------------------------------------------------- criterion 5
std::string convexity_property() {
  auto inst = oracle::random_instance(12, 2, 2, 5150);
  GroupedDesign d(inst.X, inst.group_ids);
  Response y{inst.y};
  const double lmax = lambda_max(d, y);

  for (double alpha : {0.5, 1.0}) {
    GmcConfig cfg;
    cfg.alpha = alpha;
    cfg.lambda = 0.3 * lmax;
    ProblemOps ops(d, cfg);
    CounterRng rng(42);
    for (int k = 0; k < 1000; ++k) {
      const double scale = std::pow(10.0, -2.0 + 3.0 * rng.uniform());
      Vector a(d.p()), b(d.p());
      for (Index i = 0; i < d.p(); ++i) a[i] = scale * rng.normal();
      if (k % 5 == 0)
        b = 1.3 * a;
      else
        for (Index i = 0; i < d.p(); ++i) b[i] = scale * rng.normal();
      const double gap = objective_value(0.5 * (a + b), ops, y) -
                         0.5 * objective_value(a, ops, y) -
                         0.5 * objective_value(b, ops, y);
      require(gap <= 1e-9, "midpoint convexity violated by " + fmt(gap) +
                               " at alpha " + fmt(alpha));
    }
  }

  // Negative control: lambda B'B = 2 X'X must break convexity somewhere.
  GmcConfig bad;
  bad.lambda = 0.3 * lmax;
  bad.custom_btb = 2.0 / bad.lambda * (d.X().transpose() * d.X());
  ProblemOps bad_ops(d, bad);
  CounterRng rng(99);
  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    const double scale = std::pow(10.0, -2.0 + 3.0 * rng.uniform());
    Vector a(d.p()), b(d.p());
    for (Index i = 0; i < d.p(); ++i) a[i] = scale * rng.normal();
    if (k % 5 == 0)
      b = 1.3 * a;
    else
      for (Index i = 0; i < d.p(); ++i) b[i] = scale * rng.normal();
    const double gap = objective_value(0.5 * (a + b), bad_ops, y) -
                       0.5 * objective_value(a, bad_ops, y) -
                       0.5 * objective_value(b, bad_ops, y);
    if (gap > 1e-9) ++violations;
  }
  require(violations > 0, "negative control found no violation");
  return "2000 valid pairs convex; negative control violated " +
         std::to_string(violations) + "/1000";
}

// ---------------------------------------------------------------- criterion 6
std::string solver_diagnostics() {
  require(!collected_kkt.empty(), "criteria 1-3 collected no solutions");
  double worst = 0.0;
  for (double r : collected_kkt) worst = std::max(worst, r);
  require(worst <= 1e-6,
          "KKT residual " + fmt(worst) + " above 1e-6 somewhere in criteria 1-3");

  // Finite differences on the exact smooth parts the solver iterates on.
  auto inst = oracle::random_instance(15, 3, 2, 11000);
  GroupedDesign d(inst.X, inst.group_ids);
  Response y{inst.y};
  GmcConfig cfg;
  cfg.alpha = 0.7;
  cfg.lambda = 0.2 * lambda_max(d, y);
  ProblemOps ops(d, cfg);
  const Vector xty_n = d.X().transpose() * y.y / static_cast<double>(d.n());

  CounterRng rng(3);
  Vector target(d.p()), start(d.p());
  for (Index i = 0; i < d.p(); ++i) {
    target[i] = rng.normal();
    start[i] = rng.normal();
  }
  const FbsProblem beta_prob = beta_update_problem(ops, xty_n, target, 0.8, start);
  const FbsProblem v_prob = v_update_problem(ops, target, 1.3, start);
  for (const FbsProblem* prob : {&beta_prob, &v_prob}) {
    for (int rep = 0; rep < 5; ++rep) {
      Vector x(d.p());
      for (Index i = 0; i < d.p(); ++i) x[i] = 2.0 * rng.normal();
      const double h = 1e-6 * std::max(1.0, x.norm());
      const Vector fd = oracle::finite_diff_gradient(prob->smooth_value, x, h);
      const Vector g = prob->gradient(x);
      require((fd - g).norm() <= 1e-5 * (1.0 + g.norm()),
              "finite-difference gradient mismatch " + fmt((fd - g).norm()));
    }
  }
  return "worst KKT residual " + fmt(worst) + " over " +
         std::to_string(collected_kkt.size()) + " solutions; gradients ok";
}

// ---------------------------------------------------------------- criterion 7
std::string simulation_trends() {
  CaseOptions opts;
  opts.nlambda = 50;
  opts.lambda_min_ratio = 1e-2;
  opts.folds = 5;
  opts.n = 100;
  opts.threads = 2;
  const std::uint64_t seed = 20260811;

  auto find = [](const std::vector<CaseCell>& table, double snr, double alpha,
                 const std::string& metric) {
    for (const auto& c : table) {
      if (c.snr != snr || c.alpha != alpha) continue;
      for (std::size_t k = 0; k < c.metric_names.size(); ++k)
        if (c.metric_names[k] == metric) return c.means[k];
    }
    throw Fail("cell not found in results table");
  };

  auto gmc = run_case("C1", 20, {0.6}, seed, opts);
  double prev = std::numeric_limits<double>::infinity();
  for (double snr : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    const double pe = find(gmc, snr, 0.6, "prediction_error");
    require(pe < prev, "prediction error not decreasing at SNR " + fmt(snr));
    prev = pe;
  }

  auto rest = run_case("C1", 20, {0.0, 0.8}, seed, opts);
  const double fp_lasso = find(rest, 2.0, 0.0, "fp");
  const double fp_gmc = find(rest, 2.0, 0.8, "fp");
  require(fp_gmc < fp_lasso, "false positives: gmc(0.8) " + fmt(fp_gmc) +
                                 " !< lasso " + fmt(fp_lasso));

  const double f1_lasso = find(rest, 2.0, 0.0, "f1");
  const double f1_gmc = find(gmc, 2.0, 0.6, "f1");
  require(f1_gmc >= f1_lasso,
          "F1: gmc(0.6) " + fmt(f1_gmc) + " < lasso " + fmt(f1_lasso));

  // Sparsity direction: mean selected groups non-increasing in alpha.
  const double sel0 = find(rest, 2.0, 0.0, "tp") + fp_lasso;
  const double sel6 = find(gmc, 2.0, 0.6, "tp") + find(gmc, 2.0, 0.6, "fp");
  const double sel8 = find(rest, 2.0, 0.8, "tp") + fp_gmc;
  require(sel0 >= sel6 && sel6 >= sel8,
          "selected-group count not non-increasing in alpha");

  return "pe(SNR) monotone; fp " + fmt(fp_gmc) + " < " + fmt(fp_lasso) +
         "; f1 " + fmt(f1_gmc) + " >= " + fmt(f1_lasso);
}

// ---------------------------------------------------------------- criterion 8
std::string birth_weight() {
  const char* dir_env = std::getenv("GGMC_BIRTHWT_DIR");
  if (dir_env == nullptr)
    return "SKIPPED: birth-weight fixture not present (set GGMC_BIRTHWT_DIR)";
  const fs::path dir(dir_env);
  auto [design, response] = load_problem(dir / "birthwt_design.csv",
                                         dir / "birthwt_groups.csv", "bwt_kg");
  const Index n = design.n();

  GmcConfig cfg;
  cfg.alpha = 0.8;
  std::vector<double> test_errors;
  int ftv_excluded = 0;
  int worst_groups = 0;

  CounterRng rng(189);
  for (int split = 0; split < 20; ++split) {
    // 3/4 train for lambda selection, 1/4 held out.
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.next_below(static_cast<std::uint64_t>(i) + 1)]);
    const Index n_train = (3 * n) / 4;
    std::vector<Index> train(perm.begin(), perm.begin() + n_train);
    std::vector<Index> test(perm.begin() + n_train, perm.end());

    GroupedDesign d_train = design.subset_rows(train);
    Vector y_train(n_train);
    for (Index i = 0; i < n_train; ++i) y_train[i] = response.y[train[i]];

    StandardizationRecord rec_train;
    auto [d_train_std, y_train_std] =
        standardize(d_train, Response{y_train}, rec_train);
    LambdaGrid grid = make_grid(d_train_std, y_train_std, 50, 1e-3);
    CvOptions cv_opts;
    cv_opts.threads = 2;
    CvResult cv = cross_validate(d_train_std, y_train_std, 10, grid, cfg,
                                 1000 + static_cast<std::uint64_t>(split), cv_opts);

    // Fit the full data at the selected lambda, then score the held-out quarter.
    StandardizationRecord rec_full;
    auto [d_full_std, y_full_std] = standardize(design, response, rec_full);
    LambdaGrid head = grid;
    head.values.resize(cv.selected_index + 1);
    SolutionPath path = solution_path(d_full_std, y_full_std, head, cfg);
    Vector beta = rec_full.unstandardize(
        path.coefficients.col(static_cast<Index>(cv.selected_index)));
    const double intercept = rec_full.intercept(beta);

    double err = 0.0;
    for (Index t : test) {
      const double pred = design.X().row(t).dot(beta) + intercept;
      err += (response.y[t] - pred) * (response.y[t] - pred);
    }
    test_errors.push_back(err / static_cast<double>(test.size()));

    int active = 0;
    bool ftv_active = false;
    for (Index j = 0; j < design.num_groups(); ++j) {
      const auto& g = design.group(j);
      if (beta.segment(g.start, g.size).norm() > 1e-8) {
        ++active;
        if (g.name == "ftv") ftv_active = true;
      }
    }
    worst_groups = std::max(worst_groups, active);
    if (!ftv_active) ++ftv_excluded;
  }

  std::sort(test_errors.begin(), test_errors.end());
  const double median =
      0.5 * (test_errors[9] + test_errors[10]);
  require(worst_groups <= 8, "more than 8 nonzero groups");
  require(median >= 0.30 && median <= 0.40,
          "median test prediction error " + fmt(median) + " outside 0.35 +/- 0.05");
  require(2 * ftv_excluded > 20, "'# Phys. visits' excluded in only " +
                                     std::to_string(ftv_excluded) + "/20 splits");
  return "median error " + fmt(median) + "; ftv excluded in " +
         std::to_string(ftv_excluded) + "/20 splits";
}

// ---------------------------------------------------------------- criterion 9
std::string determinism() {
  const char* cli = std::getenv("GGMC_CLI");
  require(cli != nullptr, "GGMC_CLI not set");
  const fs::path dir =
      fs::temp_directory_path() / ("ggmc_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  std::ofstream data(dir / "data.csv");
  data << "x1,x2,x3,x4,y\n";
  CounterRng rng(8);
  for (int i = 0; i < 12; ++i) {
    for (int c = 0; c < 4; ++c) data << fmt(rng.normal()) << ",";
    data << fmt(rng.normal()) << "\n";
  }
  data.close();
  std::ofstream groups(dir / "groups.csv");
  groups << "column,group\nx1,g1\nx2,g1\nx3,g2\nx4,g2\n";
  groups.close();

  auto run = [&](const std::string& args) {
    const std::string cmd = "cd " + dir.string() + " && " + cli + " " + args +
                            " > /dev/null 2>&1";
    require(std::system(cmd.c_str()) == 0, "command failed: " + args);
  };
  auto slurp = [&](const std::string& name) {
    std::ifstream in(dir / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  const std::string sim_args =
      "simulate --case C2 --replicates 1 --seed 7 --alphas 0.6 --nlambda 6 "
      "--lambda-min-ratio 0.05 --n 30 --threads 2";
  run(sim_args + " --out s1");
  run(sim_args + " --out s2");
  require(slurp("s1_results.csv") == slurp("s2_results.csv"),
          "simulate outputs differ between runs");

  const std::string cv_args =
      "cv --data data.csv --groups groups.csv --response y --alpha 0.5 "
      "--folds 4 --seed 11 --nlambda 8 --lambda-min-ratio 0.05 --threads 2";
  run(cv_args + " --out c1");
  run(cv_args + " --out c2");
  require(slurp("c1_cv.csv") == slurp("c2_cv.csv") &&
              slurp("c1_coefficients.csv") == slurp("c2_coefficients.csv"),
          "cv outputs differ between runs");

  const std::string fit_args =
      "fit --data data.csv --groups groups.csv --response y --alpha 0.9 "
      "--lambda 0.1";
  run(fit_args + " --out f1");
  run(fit_args + " --out f2");
  require(slurp("f1_coefficients.csv") == slurp("f2_coefficients.csv") &&
              slurp("f1_report.txt") == slurp("f2_report.txt"),
          "fit outputs differ between runs");

  return "simulate, cv, and fit byte-identical across reruns";
}

}  // namespace

int main() {
  Harness h;
  h.criterion(1, "zero-threshold exactness at lambda_max", zero_threshold);
  h.criterion(2, "convex-oracle equivalence at alpha 0", convex_oracle_equivalence);
  h.criterion(3, "brute-force global optimality (p=2)", brute_force_optimality);
  h.criterion(4, "penalty correctness (scaled MC, v*, MCP)", penalty_correctness);
  h.criterion(5, "midpoint convexity with negative control", convexity_property);
  h.criterion(6, "solver diagnostics (KKT, gradients)", solver_diagnostics);
  h.criterion(7, "simulation trends (Case C1)", simulation_trends);
  h.criterion(8, "birth-weight protocol", birth_weight);
  h.criterion(9, "seeded command determinism", determinism);
  if (h.failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", h.failures);
  return h.failures;
}
