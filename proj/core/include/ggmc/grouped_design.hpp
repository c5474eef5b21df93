#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ggmc/types.hpp"

namespace ggmc {

struct GroupInfo {
  Index start = 0;       // first column of the block
  Index size = 0;        // p_j >= 1
  double weight = 0.0;   // K_j, defaults to sqrt(p_j)
  std::string name;      // original group id from the group map
};

/// Design matrix with columns partitioned into contiguous group blocks.
/// Construction reorders columns so each group is contiguous (groups ordered
/// by first appearance); the permutation back to the caller's column order is
/// kept so outputs can be reported in original order. Immutable after
/// construction and safe to share across concurrent fits.
class GroupedDesign {
 public:
  /// `group_ids[c]` is the group label of column c (any strings). Weights
  /// default to sqrt(p_j) when absent.
  GroupedDesign(Matrix X, const std::vector<std::string>& group_ids,
                std::vector<std::string> column_names = {},
                std::optional<std::vector<double>> weights = std::nullopt);

  Index n() const { return X_.rows(); }
  Index p() const { return X_.cols(); }
  Index num_groups() const { return static_cast<Index>(groups_.size()); }

  const Matrix& X() const { return X_; }
  const std::vector<GroupInfo>& groups() const { return groups_; }
  const GroupInfo& group(Index j) const { return groups_[j]; }

  /// Column block of X for group j.
  auto block(Index j) const { return X_.middleCols(groups_[j].start, groups_[j].size); }
  /// Segment of a p-vector for group j.
  static auto segment(const Vector& v, const GroupInfo& g) { return v.segment(g.start, g.size); }

  /// Internal (reordered) column c maps to original column original_index(c).
  Index original_index(Index c) const { return perm_[c]; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  /// Group index of internal column c.
  Index group_of_column(Index c) const { return column_group_[c]; }

  /// Maps a coefficient vector in internal order back to original column order.
  Vector to_original_order(const Vector& beta) const;

  const std::vector<double>& group_weights_vector() const { return weights_cache_; }

  /// Internal columns whose sample variance is zero (reported as warnings).
  const std::vector<Index>& zero_variance_columns() const { return zero_variance_; }

  /// Keeps the listed rows (in the given order); groups/weights unchanged.
  GroupedDesign subset_rows(const std::vector<Index>& rows) const;

 private:
  GroupedDesign() = default;

  Matrix X_;
  std::vector<GroupInfo> groups_;
  std::vector<std::string> column_names_;  // internal order
  std::vector<Index> perm_;                // internal index -> original index
  std::vector<Index> column_group_;        // internal column -> group index
  std::vector<double> weights_cache_;      // K_j in group order
  std::vector<Index> zero_variance_;
};

struct Response {
  Vector y;
};

/// What the optional standardization did: x_std = (x - mean)/scale columnwise
/// and y_std = y - y_mean. Scales use the population standard deviation;
/// zero-variance columns are clamped to scale 1 and their coefficients forced
/// to zero on the way back.
struct StandardizationRecord {
  bool applied = false;
  Vector column_means;
  Vector column_scales;
  double y_mean = 0.0;
  std::vector<Index> clamped_columns;  // internal indices with zero variance

  /// Coefficients on the standardized scale -> raw scale (internal order).
  Vector unstandardize(const Vector& beta_std) const;
  /// Implied intercept on the raw scale.
  double intercept(const Vector& beta_raw) const;
};

std::pair<GroupedDesign, Response> standardize(const GroupedDesign& design,
                                               const Response& response,
                                               StandardizationRecord& record);

/// Reads a design CSV (header row, response column included) and a two-column
/// `column,group` map covering every predictor. Returns the validated design
/// (groups contiguous, re-indexed by first appearance) and the response.
std::pair<GroupedDesign, Response> load_problem(
    const std::filesystem::path& design_file,
    const std::filesystem::path& groups_file,
    const std::string& response_column);

/// Smallest tuning value above which the fitted coefficient vector is exactly
/// zero: max_j ||X_j' y||_2 / (n K_j).
double lambda_max(const GroupedDesign& design, const Response& response);

}  // namespace ggmc
