#include "ggmc/grouped_design.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ggmc/csv.hpp"

namespace ggmc {

namespace {

void check_finite(const Matrix& X) {
  if (!X.allFinite())
    throw ValidationError("design matrix contains NaN or Inf entries");
}

}  // namespace

GroupedDesign::GroupedDesign(Matrix X,
                             const std::vector<std::string>& group_ids,
                             std::vector<std::string> column_names,
                             std::optional<std::vector<double>> weights) {
  const Index p = X.cols();
  if (p == 0) throw ValidationError("design has no columns");
  if (X.rows() == 0) throw ValidationError("design has no rows");
  if (static_cast<Index>(group_ids.size()) != p)
    throw ValidationError("group id list length does not match column count");
  check_finite(X);

  if (column_names.empty()) {
    column_names.resize(p);
    for (Index c = 0; c < p; ++c) column_names[c] = "x" + std::to_string(c + 1);
  }
  if (static_cast<Index>(column_names.size()) != p)
    throw ValidationError("column name list length does not match column count");
  {
    std::set<std::string> seen;
    for (const auto& name : column_names)
      if (!seen.insert(name).second)
        throw ValidationError("duplicate column name: " + name);
  }

  // Group order = first appearance while scanning columns left to right.
  std::map<std::string, Index> group_index;
  std::vector<std::vector<Index>> members;
  for (Index c = 0; c < p; ++c) {
    auto [it, inserted] =
        group_index.try_emplace(group_ids[c], static_cast<Index>(members.size()));
    if (inserted) members.emplace_back();
    members[it->second].push_back(c);
  }
  const Index J = static_cast<Index>(members.size());

  if (weights && static_cast<Index>(weights->size()) != J)
    throw ValidationError("expected one weight per group (" +
                          std::to_string(J) + " groups)");

  X_.resize(X.rows(), p);
  column_names_.resize(p);
  perm_.resize(p);
  column_group_.resize(p);
  groups_.resize(J);

  Index out = 0;
  for (Index j = 0; j < J; ++j) {
    GroupInfo& g = groups_[j];
    g.start = out;
    g.size = static_cast<Index>(members[j].size());
    g.weight = weights ? (*weights)[j] : std::sqrt(static_cast<double>(g.size));
    if (g.weight < 0.0)
      throw ValidationError("negative weight for group " + std::to_string(j + 1));
    for (Index c : members[j]) {
      X_.col(out) = X.col(c);
      column_names_[out] = column_names[c];
      perm_[out] = c;
      column_group_[out] = j;
      ++out;
    }
  }
  for (Index j = 0; j < J; ++j) {
    const auto& first_col = members[j].front();
    groups_[j].name = group_ids[first_col];
    weights_cache_.push_back(groups_[j].weight);
  }

  for (Index c = 0; c < p; ++c) {
    const double mean = X_.col(c).mean();
    const double var = (X_.col(c).array() - mean).square().mean();
    if (var == 0.0) zero_variance_.push_back(c);
  }
}

Vector GroupedDesign::to_original_order(const Vector& beta) const {
  Vector out(p());
  for (Index c = 0; c < p(); ++c) out[perm_[c]] = beta[c];
  return out;
}

GroupedDesign GroupedDesign::subset_rows(const std::vector<Index>& rows) const {
  if (rows.empty()) throw ValidationError("row subset is empty");
  GroupedDesign d;
  d.X_.resize(static_cast<Index>(rows.size()), p());
  for (std::size_t i = 0; i < rows.size(); ++i) d.X_.row(static_cast<Index>(i)) = X_.row(rows[i]);
  d.groups_ = groups_;
  d.column_names_ = column_names_;
  d.perm_ = perm_;
  d.column_group_ = column_group_;
  d.weights_cache_ = weights_cache_;
  for (Index c = 0; c < d.p(); ++c) {
    const double mean = d.X_.col(c).mean();
    const double var = (d.X_.col(c).array() - mean).square().mean();
    if (var == 0.0) d.zero_variance_.push_back(c);
  }
  return d;
}

Vector StandardizationRecord::unstandardize(const Vector& beta_std) const {
  if (!applied) return beta_std;
  Vector out = beta_std.array() / column_scales.array();
  for (Index c : clamped_columns) out[c] = 0.0;
  return out;
}

double StandardizationRecord::intercept(const Vector& beta_raw) const {
  if (!applied) return 0.0;
  return y_mean - column_means.dot(beta_raw);
}

std::pair<GroupedDesign, Response> standardize(const GroupedDesign& design,
                                               const Response& response,
                                               StandardizationRecord& record) {
  const Index n = design.n();
  const Index p = design.p();
  record.applied = true;
  record.column_means.resize(p);
  record.column_scales.resize(p);
  record.clamped_columns.clear();

  Matrix Xs(n, p);
  for (Index c = 0; c < p; ++c) {
    const double mean = design.X().col(c).mean();
    double scale = std::sqrt((design.X().col(c).array() - mean).square().mean());
    if (scale == 0.0) {
      scale = 1.0;
      record.clamped_columns.push_back(c);
    }
    record.column_means[c] = mean;
    record.column_scales[c] = scale;
    Xs.col(c) = (design.X().col(c).array() - mean) / scale;
  }
  record.y_mean = response.y.mean();

  // Rebuild with identity group labels; columns are already contiguous.
  std::vector<std::string> ids(p);
  for (Index c = 0; c < p; ++c)
    ids[c] = std::to_string(design.group_of_column(c));
  std::vector<double> weights;
  for (const auto& g : design.groups()) weights.push_back(g.weight);
  GroupedDesign out(std::move(Xs), ids, design.column_names(), weights);
  // Column means/scales are indexed by the input design's internal order,
  // which the rebuild preserves (labels were already contiguous).
  Response ys{response.y.array() - record.y_mean};
  return {std::move(out), std::move(ys)};
}

std::pair<GroupedDesign, Response> load_problem(
    const std::filesystem::path& design_file,
    const std::filesystem::path& groups_file,
    const std::string& response_column) {
  csv::Table data = csv::read_table(design_file);
  csv::Table map = csv::read_table(groups_file);

  if (map.num_cols() != 2 || map.header[0] != "column" || map.header[1] != "group")
    throw ValidationError("group map must have header 'column,group': " +
                          groups_file.string());

  const long yc = data.find_column(response_column);
  if (yc < 0)
    throw ValidationError("response column '" + response_column +
                          "' not found in " + design_file.string());

  {
    std::set<std::string> seen;
    for (const auto& name : data.header)
      if (!seen.insert(name).second)
        throw ValidationError("duplicate column name: " + name);
  }

  std::map<std::string, std::string> column_to_group;
  for (const auto& row : map.rows) {
    if (!column_to_group.emplace(row[0], row[1]).second)
      throw ValidationError("column '" + row[0] + "' mapped twice in group map");
    if (data.find_column(row[0]) < 0)
      throw ValidationError("group map names unknown column '" + row[0] + "'");
    if (row[0] == response_column)
      throw ValidationError("response column '" + row[0] +
                            "' must not appear in the group map");
  }

  const Index n = static_cast<Index>(data.num_rows());
  const Index p = static_cast<Index>(data.num_cols()) - 1;
  if (p < 1) throw ValidationError("design has no predictor columns");

  std::vector<std::string> names;
  std::vector<std::string> ids;
  Matrix X(n, p);
  Vector y(n);
  Index out = 0;
  for (std::size_t c = 0; c < data.num_cols(); ++c) {
    const std::string& name = data.header[c];
    if (static_cast<long>(c) == yc) {
      for (Index i = 0; i < n; ++i)
        y[i] = csv::parse_number(data.rows[i][c], "column '" + name + "'");
      continue;
    }
    auto it = column_to_group.find(name);
    if (it == column_to_group.end())
      throw ValidationError("unmapped column '" + name +
                            "' (not present in group map)");
    for (Index i = 0; i < n; ++i)
      X(i, out) = csv::parse_number(data.rows[i][c], "column '" + name + "'");
    names.push_back(name);
    ids.push_back(it->second);
    ++out;
  }

  if (!y.allFinite())
    throw ValidationError("response column contains NaN or Inf entries");

  GroupedDesign design(std::move(X), ids, names);
  return {std::move(design), Response{std::move(y)}};
}

double lambda_max(const GroupedDesign& design, const Response& response) {
  if (response.y.size() != design.n())
    throw ValidationError("response length does not match design rows");
  if (!response.y.allFinite())
    throw ValidationError("response contains NaN or Inf entries");

  const double n = static_cast<double>(design.n());
  double best = 0.0;
  for (Index j = 0; j < design.num_groups(); ++j) {
    const GroupInfo& g = design.group(j);
    if (g.weight == 0.0)
      throw ValidationError("lambda_max undefined: group '" + g.name +
                            "' has zero weight");
    const double num = (design.block(j).transpose() * response.y).norm();
    best = std::max(best, num / (n * g.weight));
  }
  return best;
}

}  // namespace ggmc
