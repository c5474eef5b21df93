#include "ggmc/prox.hpp"

#include <cmath>

namespace ggmc {

GroupThresholds GroupThresholds::scaled(const std::vector<GroupInfo>& groups,
                                        double factor) {
  GroupThresholds th;
  th.t.reserve(groups.size());
  for (const auto& g : groups) th.t.push_back(factor * g.weight);
  return th;
}

Vector prox_group_l2(const Vector& u, const GroupThresholds& thresholds,
                     const std::vector<GroupInfo>& groups) {
  if (thresholds.t.size() != groups.size())
    throw ValidationError("one threshold per group required");
  Vector out(u.size());
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const GroupInfo& g = groups[j];
    const double t = thresholds.t[j];
    if (!(t >= 0.0) || !std::isfinite(t))
      throw ValidationError("thresholds must be finite and nonnegative");
    const auto uj = u.segment(g.start, g.size);
    const double norm = uj.norm();
    if (norm <= t || norm == 0.0) {
      out.segment(g.start, g.size).setZero();
    } else {
      out.segment(g.start, g.size) = (1.0 - t / norm) * uj;
    }
  }
  return out;
}

}  // namespace ggmc
