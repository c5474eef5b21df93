#include "ggmc/sim.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "ggmc/parallel.hpp"
#include "ggmc/prox.hpp"
#include "ggmc/rng.hpp"

namespace ggmc {

namespace {

// Standard normal tertile Phi^{-1}(2/3); the lower cut is its negation.
constexpr double kTertile = 0.43072729929545744;

// Level coding: 0 below -kTertile, 1 above +kTertile, 2 in between.
int trichotomize(double z) {
  if (z < -kTertile) return 0;
  if (z > kTertile) return 1;
  return 2;
}

}  // namespace

SimDataset simulate_anova(int num_latent, double rho, double snr, Index n,
                          std::uint64_t seed) {
  if (num_latent != 4 && num_latent != 10 && num_latent != 16)
    throw ValidationError("num_latent must be 4, 10, or 16");
  if (!(rho >= 0.0 && rho < 1.0))
    throw ValidationError("rho must lie in [0,1)");
  if (!(snr > 0.0)) throw ValidationError("snr must be positive");
  if (n < 2) throw ValidationError("need n >= 2");

  const int m = num_latent;
  Matrix cov(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) cov(i, j) = std::pow(rho, std::abs(i - j));
  const Matrix chol = Eigen::LLT<Matrix>(cov).matrixL();

  // Stream layout: n*m latent normals row by row, then n noise normals.
  CounterRng rng(seed);
  Eigen::MatrixXi levels(n, m);
  for (Index i = 0; i < n; ++i) {
    Vector raw(m);
    for (int j = 0; j < m; ++j) raw[j] = rng.normal();
    const Vector latent = chol * raw;
    for (int j = 0; j < m; ++j) levels(i, j) = trichotomize(latent[j]);
  }
  Vector noise(n);
  for (Index i = 0; i < n; ++i) noise[i] = rng.normal();

  // Main-effect groups (2 dummies: level 1, level 0), then pairwise
  // interactions (4 dummies: products in (1,1),(1,0),(0,1),(0,0) order).
  const Index p = 2 * m + 4 * (m * (m - 1) / 2);
  Matrix X = Matrix::Zero(n, p);
  std::vector<std::string> ids;
  std::vector<std::string> names;
  ids.reserve(p);
  names.reserve(p);

  Index col = 0;
  for (int j = 0; j < m; ++j) {
    const std::string group = "Z" + std::to_string(j + 1);
    for (int level : {1, 0}) {
      for (Index i = 0; i < n; ++i) X(i, col) = levels(i, j) == level ? 1.0 : 0.0;
      ids.push_back(group);
      names.push_back(group + "_" + std::to_string(level));
      ++col;
    }
  }
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const std::string group =
          "Z" + std::to_string(a + 1) + "xZ" + std::to_string(b + 1);
      for (int la : {1, 0}) {
        for (int lb : {1, 0}) {
          for (Index i = 0; i < n; ++i)
            X(i, col) =
                (levels(i, a) == la && levels(i, b) == lb) ? 1.0 : 0.0;
          ids.push_back(group);
          names.push_back(group + "_" + std::to_string(la) +
                          std::to_string(lb));
          ++col;
        }
      }
    }
  }

  // Truth: main effects of Z1 and Z2 plus their interaction.
  Vector beta_star = Vector::Zero(p);
  beta_star[0] = 3.0;   // 1(Z1=1)
  beta_star[1] = 2.0;   // 1(Z1=0)
  beta_star[2] = 3.0;   // 1(Z2=1)
  beta_star[3] = 2.0;   // 1(Z2=0)
  const Index inter = 2 * m;  // Z1xZ2 block
  beta_star[inter + 0] = 1.0;
  beta_star[inter + 1] = 1.5;
  beta_star[inter + 2] = 2.0;
  beta_star[inter + 3] = 2.5;

  const Vector signal = X * beta_star;
  const double sigma = signal.norm() / (std::sqrt(static_cast<double>(n)) * snr);

  SimDataset out{GroupedDesign(std::move(X), ids, names),
                 Response{signal + sigma * noise},
                 std::move(beta_star),
                 sigma,
                 rho,
                 snr,
                 seed};
  return out;
}

MetricSet compute_metrics(const Vector& beta_hat, const SimDataset& dataset) {
  const GroupedDesign& d = dataset.design;
  if (beta_hat.size() != d.p())
    throw ValidationError("compute_metrics: dimension mismatch");
  MetricSet m;
  const Vector diff = beta_hat - dataset.beta_star;
  m.mse = diff.squaredNorm() / static_cast<double>(d.p());
  m.prediction_error =
      (d.X() * diff).squaredNorm() / static_cast<double>(d.n());
  for (Index j = 0; j < d.num_groups(); ++j) {
    const auto& g = d.group(j);
    const bool truly = dataset.beta_star.segment(g.start, g.size).norm() > 0.0;
    const bool selected = beta_hat.segment(g.start, g.size).norm() > 1e-8;
    if (selected && truly) ++m.tp;
    if (selected && !truly) ++m.fp;
    if (!selected && truly) ++m.fn;
  }
  const int denom = 2 * m.tp + m.fp + m.fn;
  m.f1 = denom > 0 ? 2.0 * m.tp / denom : 0.0;
  return m;
}

namespace {

struct CellSpec {
  double snr;
  double rho;
  int num_latent;
  double alpha;
};

struct ReplicateOutcome {
  bool ok = false;
  MetricSet metrics;
};

ReplicateOutcome run_replicate(const CellSpec& cell, std::uint64_t rep_seed,
                               const CaseOptions& opts) {
  ReplicateOutcome out;
  SimDataset data =
      simulate_anova(cell.num_latent, cell.rho, cell.snr, opts.n, rep_seed);
  GmcConfig cfg;
  cfg.alpha = cell.alpha;
  LambdaGrid grid = make_grid(data.design, data.response, opts.nlambda,
                              opts.lambda_min_ratio);
  CvOptions cv_opts;
  cv_opts.solver = opts.solver;
  CvResult cv = cross_validate(data.design, data.response, opts.folds, grid,
                               cfg, rep_seed, cv_opts);
  // Full-data fit at the selected lambda, warm-started along the grid prefix.
  LambdaGrid head = grid;
  head.values.resize(cv.selected_index + 1);
  SolutionPath path =
      solution_path(data.design, data.response, head, cfg, opts.solver);
  if (!path.reports.back().converged) return out;
  out.metrics = compute_metrics(
      path.coefficients.col(static_cast<Index>(cv.selected_index)), data);
  out.ok = true;
  return out;
}

CaseCell aggregate(const std::string& case_name, const CellSpec& cell,
                   const std::vector<ReplicateOutcome>& outcomes, Index p) {
  CaseCell c;
  c.case_name = case_name;
  c.snr = cell.snr;
  c.rho = cell.rho;
  c.p = p;
  c.alpha = cell.alpha;
  c.replicates = static_cast<int>(outcomes.size());
  c.metric_names = {"mse", "prediction_error", "f1", "tp", "fp", "fn"};

  std::vector<std::vector<double>> samples(c.metric_names.size());
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++c.failures;
      continue;
    }
    samples[0].push_back(o.metrics.mse);
    samples[1].push_back(o.metrics.prediction_error);
    samples[2].push_back(o.metrics.f1);
    samples[3].push_back(o.metrics.tp);
    samples[4].push_back(o.metrics.fp);
    samples[5].push_back(o.metrics.fn);
  }
  for (const auto& s : samples) {
    if (s.empty()) {
      c.means.push_back(std::nan(""));
      c.stderrs.push_back(std::nan(""));
      continue;
    }
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean);
    var = s.size() > 1 ? var / static_cast<double>(s.size() - 1) : 0.0;
    c.means.push_back(mean);
    c.stderrs.push_back(std::sqrt(var / static_cast<double>(s.size())));
  }
  return c;
}

Index dimension_for(int num_latent) {
  return 2 * num_latent + 4 * (num_latent * (num_latent - 1) / 2);
}

}  // namespace

std::vector<CaseCell> run_case(const std::string& case_name, int replicates,
                               std::vector<double> alpha_list,
                               std::uint64_t seed, const CaseOptions& opts) {
  if (replicates < 1) throw ValidationError("replicates must be >= 1");

  std::vector<CellSpec> cells;
  if (case_name == "C1") {
    if (alpha_list.empty()) alpha_list = {0.2, 0.4, 0.6, 0.8, 1.0};
    for (double snr : {1.0, 2.0, 3.0, 4.0, 5.0})
      for (double alpha : alpha_list) cells.push_back({snr, 0.0, 4, alpha});
  } else if (case_name == "C2") {
    if (alpha_list.empty()) alpha_list = {0.6};
    for (double rho : {0.0, 0.2, 0.4, 0.6, 0.8})
      for (double alpha : alpha_list) cells.push_back({2.0, rho, 4, alpha});
  } else if (case_name == "C3") {
    if (alpha_list.empty()) alpha_list = {0.6};
    for (int m : {4, 10, 16})
      for (double alpha : alpha_list) cells.push_back({2.0, 0.0, m, alpha});
  } else {
    throw ValidationError("unknown case '" + case_name + "' (expected C1, C2, or C3)");
  }

  // Flatten (cell, replicate) so replicates parallelize across cells too.
  const std::size_t total = cells.size() * static_cast<std::size_t>(replicates);
  std::vector<ReplicateOutcome> outcomes(total);
  parallel_for(total, opts.threads, [&](std::size_t idx) {
    const CellSpec& cell = cells[idx / replicates];
    const std::uint64_t rep = idx % replicates;
    outcomes[idx] = run_replicate(cell, seed ^ rep, opts);
  });

  std::vector<CaseCell> table;
  table.reserve(cells.size());
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    std::vector<ReplicateOutcome> slice(
        outcomes.begin() + static_cast<long>(ci * replicates),
        outcomes.begin() + static_cast<long>((ci + 1) * replicates));
    table.push_back(aggregate(case_name, cells[ci], slice,
                              dimension_for(cells[ci].num_latent)));
  }
  return table;
}

Matrix btb_from_design(const GroupedDesign& design, double alpha,
                       double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("btb_from_design needs lambda > 0");
  return (alpha / lambda) *
         (design.X().transpose() * design.X());
}

Matrix btb_identity(Index p, double eta, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("btb_identity needs lambda > 0");
  return (eta / lambda) * Matrix::Identity(p, p);
}

TheoryDiagnostics theory_diagnostics(const GroupedDesign& design,
                                     const Vector& beta_star,
                                     const Matrix& btb) {
  const Index p = design.p();
  if (beta_star.size() != p)
    throw ValidationError("theory_diagnostics: beta* length mismatch");
  if (btb.rows() != p || btb.cols() != p)
    throw ValidationError("theory_diagnostics: B'B must be p x p");
  const double n = static_cast<double>(design.n());
  const auto& groups = design.groups();

  TheoryDiagnostics out;
  for (Index j = 0; j < design.num_groups(); ++j)
    if (beta_star.segment(groups[j].start, groups[j].size).norm() > 0.0)
      out.support.push_back(j);

  if (beta_star.isZero(0.0)) {
    out.v_star = Vector::Zero(p);
  } else {
    // v* = argmin sum_j K_j ||v_j|| + (1/2n)(beta*-v)'B'B(beta*-v), by FBS.
    FbsProblem prob;
    prob.x0 = Vector::Zero(p);
    prob.gradient = [&](const Vector& v) {
      return (btb * (v - beta_star) / n).eval();
    };
    prob.smooth_value = [&](const Vector& v) {
      const Vector d = beta_star - v;
      return 0.5 * d.dot(btb * d) / n;
    };
    prob.nonsmooth_value = [&](const Vector& v) {
      double s = 0.0;
      for (const auto& g : groups) s += g.weight * v.segment(g.start, g.size).norm();
      return s;
    };
    prob.prox = [&](const Vector& u, double t) {
      return prox_group_l2(u, GroupThresholds::scaled(groups, t), groups);
    };
    out.v_star = fbs_solve(prob, penalty_fbs_options()).first;
  }

  const Vector residual = btb * (beta_star - out.v_star);
  std::size_t support_pos = 0;
  for (Index j = 0; j < design.num_groups(); ++j) {
    const auto& g = groups[j];
    const double dev = residual.segment(g.start, g.size).norm() / n;
    const bool in_support =
        support_pos < out.support.size() && out.support[support_pos] == j;
    if (in_support) ++support_pos;
    const double nu_j = in_support ? g.weight + dev : g.weight - dev;
    out.nu.push_back(nu_j);
    if (in_support) {
      out.nu_bar = out.nu_bar ? std::max(*out.nu_bar, nu_j) : nu_j;
    } else {
      out.nu_underline = out.nu_underline ? std::min(*out.nu_underline, nu_j) : nu_j;
      if (!(nu_j > 0.0)) out.a3_ok = false;
    }
  }
  return out;
}

}  // namespace ggmc
