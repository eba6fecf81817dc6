#pragma once

#include "farfield/core/audio.h"

namespace farfield::preprocess {

struct ClipNormConfig {
  double percentile = 0.998;  // of |x|, in (0, 1]
  double target_peak = 0.95;  // in (0, 1]

  void Validate() const;
};

// Per channel: clip to +/- the configured percentile of |x|, then rescale so
// that the peak magnitude equals `target_peak`. Silent channels pass through.
MultichannelAudio ClipNormalize(const MultichannelAudio& audio,
                                const ClipNormConfig& cfg);

}  // namespace farfield::preprocess
