#pragma once

#include <vector>

#include "ggmc/grouped_design.hpp"
#include "ggmc/types.hpp"

namespace ggmc {

/// Per-group thresholds t_j >= 0, typically step * lambda * K_j.
struct GroupThresholds {
  std::vector<double> t;

  static GroupThresholds scaled(const std::vector<GroupInfo>& groups,
                                double factor);
};

/// Blockwise shrinkage (1 - t_j/||u_j||)_+ u_j, the proximal operator of
/// sum_j t_j ||.||_2. A zero-norm block maps to zero regardless of threshold.
Vector prox_group_l2(const Vector& u, const GroupThresholds& thresholds,
                     const std::vector<GroupInfo>& groups);

}  // namespace ggmc
