#pragma once

#include <cstdint>
#include <vector>

#include "ggmc/path.hpp"

namespace ggmc {

struct CvResult {
  LambdaGrid grid;
  std::vector<double> mean_error;   // held-out MSE per lambda
  std::vector<double> std_error;    // standard error of that mean across folds
  std::size_t selected_index = 0;   // minimum rule, ties toward larger lambda
  double selected_lambda = 0.0;
  std::size_t selected_index_1se = 0;
  double selected_lambda_1se = 0.0;
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<int> fold_assignment;  // fold id per observation
};

struct CvOptions {
  PdhgOptions solver;
  bool standardize = false;  // per-fold: fit standardized, score on raw scale
  int threads = 1;
};

/// Seeded fold assignment: a Fisher-Yates permutation of 0..n-1 cut into
/// `folds` contiguous slices whose sizes differ by at most one.
std::vector<int> make_fold_assignment(Index n, int folds, std::uint64_t seed);

/// Minimum-rule index with ties broken toward larger lambda (grid is
/// descending, so the earliest minimum wins).
std::size_t select_min_lambda(const std::vector<double>& mean_error);
/// One-standard-error rule: largest lambda whose mean is within one standard
/// error of the minimum.
std::size_t select_one_se_lambda(const std::vector<double>& mean_error,
                                 const std::vector<double>& std_error);

CvResult cross_validate(const GroupedDesign& design, const Response& response,
                        int folds, const LambdaGrid& grid, const GmcConfig& cfg,
                        std::uint64_t seed, const CvOptions& opts = {});

/// Same, with a caller-supplied fold assignment (one id in [0,folds) per row).
CvResult cross_validate_with_folds(const GroupedDesign& design,
                                   const Response& response,
                                   const std::vector<int>& fold_assignment,
                                   const LambdaGrid& grid, const GmcConfig& cfg,
                                   const CvOptions& opts = {});

}  // namespace ggmc
