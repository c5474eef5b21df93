#include "ggmc/cv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ggmc/parallel.hpp"
#include "ggmc/rng.hpp"

namespace ggmc {

std::vector<int> make_fold_assignment(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("need at least 2 folds");
  if (static_cast<Index>(folds) > n)
    throw ValidationError("more folds than observations (" +
                          std::to_string(folds) + " > " + std::to_string(n) + ")");
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  CounterRng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  // Contiguous slices of the permutation; the first n % folds get the extra row.
  std::vector<int> assignment(n);
  const Index base = n / folds;
  const Index extra = n % folds;
  Index pos = 0;
  for (int f = 0; f < folds; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    for (Index i = 0; i < size; ++i) assignment[perm[pos++]] = f;
  }
  return assignment;
}

std::size_t select_min_lambda(const std::vector<double>& mean_error) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < mean_error.size(); ++i)
    if (mean_error[i] < mean_error[best]) best = i;
  return best;  // first (largest-lambda) index attaining the minimum
}

std::size_t select_one_se_lambda(const std::vector<double>& mean_error,
                                 const std::vector<double>& std_error) {
  const std::size_t min_idx = select_min_lambda(mean_error);
  const double cutoff = mean_error[min_idx] + std_error[min_idx];
  for (std::size_t i = 0; i <= min_idx; ++i)
    if (mean_error[i] <= cutoff) return i;
  return min_idx;
}

CvResult cross_validate_with_folds(const GroupedDesign& design,
                                   const Response& response,
                                   const std::vector<int>& fold_assignment,
                                   const LambdaGrid& grid, const GmcConfig& cfg,
                                   const CvOptions& opts) {
  const Index n = design.n();
  if (static_cast<Index>(fold_assignment.size()) != n)
    throw ValidationError("fold assignment length does not match n");
  const int folds =
      1 + *std::max_element(fold_assignment.begin(), fold_assignment.end());
  const std::size_t L = grid.values.size();

  // fold_mse[f][l] = held-out MSE of the model fitted without fold f.
  std::vector<std::vector<double>> fold_mse(folds);

  parallel_for(static_cast<std::size_t>(folds), opts.threads, [&](std::size_t f) {
    std::vector<Index> train_rows, test_rows;
    for (Index i = 0; i < n; ++i) {
      (fold_assignment[i] == static_cast<int>(f) ? test_rows : train_rows)
          .push_back(i);
    }
    if (train_rows.empty())
      throw ValidationError("fold " + std::to_string(f) + " has no training rows");
    if (test_rows.empty())
      throw ValidationError("fold " + std::to_string(f) + " is empty");

    GroupedDesign train = design.subset_rows(train_rows);
    Vector y_train(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i)
      y_train[static_cast<Index>(i)] = response.y[train_rows[i]];

    Matrix x_test(test_rows.size(), design.p());
    Vector y_test(test_rows.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      x_test.row(static_cast<Index>(i)) = design.X().row(test_rows[i]);
      y_test[static_cast<Index>(i)] = response.y[test_rows[i]];
    }

    StandardizationRecord record;
    SolutionPath path;
    if (opts.standardize) {
      auto [train_std, y_std] = standardize(train, Response{y_train}, record);
      path = solution_path(train_std, y_std, grid, cfg, opts.solver);
    } else {
      path = solution_path(train, Response{y_train}, grid, cfg, opts.solver);
    }

    std::vector<double> mse(L);
    for (std::size_t l = 0; l < L; ++l) {
      Vector beta = path.coefficients.col(static_cast<Index>(l));
      double intercept = 0.0;
      if (opts.standardize) {
        beta = record.unstandardize(beta);
        intercept = record.intercept(beta);
      }
      const Vector pred = (x_test * beta).array() + intercept;
      mse[l] = (y_test - pred).squaredNorm() / static_cast<double>(y_test.size());
    }
    fold_mse[f] = std::move(mse);
  });

  CvResult out;
  out.grid = grid;
  out.folds = folds;
  out.fold_assignment = fold_assignment;
  out.mean_error.resize(L);
  out.std_error.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    double mean = 0.0;
    for (int f = 0; f < folds; ++f) mean += fold_mse[f][l];
    mean /= folds;
    double var = 0.0;
    for (int f = 0; f < folds; ++f) {
      const double d = fold_mse[f][l] - mean;
      var += d * d;
    }
    var = folds > 1 ? var / (folds - 1) : 0.0;
    out.mean_error[l] = mean;
    out.std_error[l] = std::sqrt(var / folds);
  }

  out.selected_index = select_min_lambda(out.mean_error);
  out.selected_lambda = grid.values[out.selected_index];
  out.selected_index_1se = select_one_se_lambda(out.mean_error, out.std_error);
  out.selected_lambda_1se = grid.values[out.selected_index_1se];
  return out;
}

CvResult cross_validate(const GroupedDesign& design, const Response& response,
                        int folds, const LambdaGrid& grid, const GmcConfig& cfg,
                        std::uint64_t seed, const CvOptions& opts) {
  auto assignment = make_fold_assignment(design.n(), folds, seed);
  CvResult out =
      cross_validate_with_folds(design, response, assignment, grid, cfg, opts);
  out.seed = seed;
  return out;
}

}  // namespace ggmc
