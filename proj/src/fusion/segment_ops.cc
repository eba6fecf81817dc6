#include "farfield/fusion/segment_ops.h"

#include <algorithm>

#include "farfield/core/errors.h"

namespace farfield::fusion {

Segmentation ErodeBounds(const Segmentation& seg, double margin) {
  if (margin < 0.0) throw ConfigError("erosion margin must be >= 0");
  Segmentation out{seg.session_id, {}};
  for (const auto& t : seg.turns) {
    if (t.end - t.start <= 2.0 * margin) continue;
    out.turns.push_back({t.speaker, t.start + margin, t.end - margin});
  }
  return out;
}

Segmentation ExtendSegments(const Segmentation& seg, double margin,
                            double session_end) {
  if (margin < 0.0) throw ConfigError("extension margin must be >= 0");
  Segmentation out{seg.session_id, {}};
  for (const auto& t : seg.turns) {
    out.turns.push_back({t.speaker, std::max(0.0, t.start - margin),
                         std::min(session_end, t.end + margin)});
  }
  return out;
}

Segmentation Binarize(const SoftActivity& activity, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("binarize threshold must be in (0, 1)");
  }
  Segmentation out{activity.session_id, {}};
  for (int s = 0; s < activity.speakers(); ++s) {
    int run_start = -1;
    for (int t = 0; t <= activity.frames(); ++t) {
      const bool on = t < activity.frames() && activity.probs(s, t) >= threshold;
      if (on && run_start < 0) run_start = t;
      if (!on && run_start >= 0) {
        out.turns.push_back({activity.Label(s), run_start * activity.frame_step,
                             t * activity.frame_step});
        run_start = -1;
      }
    }
  }
  out.Sort();
  return out;
}

}  // namespace farfield::fusion
