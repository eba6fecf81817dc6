#pragma once

#include <vector>

#include "farfield/core/segmentation.h"
#include "farfield/fusion/soft_activity.h"

namespace farfield::fusion {

// Pearson correlation of two rows; 0 when either row is constant.
double PearsonCorrelation(const Eigen::RowVectorXd& a,
                          const Eigen::RowVectorXd& b);

// Permutation maximizing the summed correlation between a's rows and the
// matched rows of b: row s of `a` pairs with row result[s] of `b`. The
// smaller activity is padded with silent rows.
std::vector<int> BestPermutation(const SoftActivity& a, const SoftActivity& b);

struct SoftFusionResult {
  SoftActivity fused;         // rows follow the reference speakers
  std::vector<int> selected;  // indices of activities that were averaged
  bool fallback = false;      // no activity matched the reference count
};

// Keeps activities whose speaker count equals the reference's, aligns each
// with the reference's binary activity by BestPermutation and averages them.
SoftFusionResult SoftFuse(const std::vector<SoftActivity>& activities,
                          const Segmentation& reference);

}  // namespace farfield::fusion
