#pragma once

#include "farfield/core/segmentation.h"
#include "farfield/fusion/soft_activity.h"

namespace farfield::fusion {

// Shrinks every turn by `margin` on both sides; turns no longer than
// 2 * margin are dropped.
Segmentation ErodeBounds(const Segmentation& seg, double margin);

// Grows every turn by `margin` on both sides, clamped to [0, session_end].
Segmentation ExtendSegments(const Segmentation& seg, double margin,
                            double session_end);

// Runs of frames with probability >= threshold become turns.
Segmentation Binarize(const SoftActivity& activity, double threshold = 0.5);

}  // namespace farfield::fusion
