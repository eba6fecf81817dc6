#include "farfield/fusion/soft_fusion.h"

#include <cmath>

#include "farfield/core/assignment.h"
#include "farfield/core/errors.h"
#include "farfield/core/logging.h"

namespace farfield::fusion {

double PearsonCorrelation(const Eigen::RowVectorXd& a,
                          const Eigen::RowVectorXd& b) {
  const Eigen::ArrayXd da = (a.array() - a.mean()).transpose();
  const Eigen::ArrayXd db = (b.array() - b.mean()).transpose();
  const double va = da.square().sum();
  const double vb = db.square().sum();
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return (da * db).sum() / std::sqrt(va * vb);
}

std::vector<int> BestPermutation(const SoftActivity& a, const SoftActivity& b) {
  if (a.frames() != b.frames()) {
    throw DataError("best_permutation: frame counts differ");
  }
  const int n = std::max(a.speakers(), b.speakers());
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < a.speakers(); ++i) {
    for (int j = 0; j < b.speakers(); ++j) {
      corr(i, j) = PearsonCorrelation(a.probs.row(i), b.probs.row(j));
    }
  }
  return MaxWeightAssignment(corr);
}

SoftFusionResult SoftFuse(const std::vector<SoftActivity>& activities,
                          const Segmentation& reference) {
  if (activities.empty()) throw DataError("soft_fuse: no activities");
  const int frames = activities.front().frames();
  const double step = activities.front().frame_step;
  for (const auto& a : activities) {
    a.Validate();
    if (a.frames() != frames || a.frame_step != step) {
      throw DataError("soft_fuse: activities use different frame grids");
    }
  }
  const std::vector<std::string> speakers = reference.Speakers();
  const SoftActivity ref = Rasterize(reference, speakers, step, frames);

  SoftFusionResult result;
  result.fused = ref;
  result.fused.session_id = reference.session_id;
  result.fused.source_tag = "soft_fusion";
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(ref.speakers(), frames);
  for (std::size_t i = 0; i < activities.size(); ++i) {
    const SoftActivity& a = activities[i];
    if (a.speakers() != ref.speakers()) continue;
    const std::vector<int> perm = BestPermutation(ref, a);
    for (int s = 0; s < ref.speakers(); ++s) sum.row(s) += a.probs.row(perm[s]);
    result.selected.push_back(static_cast<int>(i));
  }
  if (result.selected.empty()) {
    Logger()->warn("soft_fuse: no activity matches the reference speaker "
                   "count {}; using the reference activity",
                   ref.speakers());
    result.fallback = true;
    return result;
  }
  result.fused.probs = sum / static_cast<double>(result.selected.size());
  return result;
}

}  // namespace farfield::fusion
