#include "farfield/preprocess/clip_normalize.h"

#include <cmath>
#include <stdexcept>

#include "farfield/core/errors.h"
#include "farfield/core/signal_ops.h"

namespace farfield::preprocess {

void ClipNormConfig::Validate() const {
  if (!(percentile > 0.0 && percentile <= 1.0)) {
    throw ConfigError("clip percentile must be in (0, 1]");
  }
  if (!(target_peak > 0.0 && target_peak <= 1.0)) {
    throw ConfigError("target peak must be in (0, 1]");
  }
}

MultichannelAudio ClipNormalize(const MultichannelAudio& audio,
                                const ClipNormConfig& cfg) {
  cfg.Validate();
  if (audio.empty()) throw DataError("clip_normalize: empty audio");
  MultichannelAudio out = audio;
  for (int c = 0; c < out.channels(); ++c) {
    auto row = out.samples.row(c);
    const double peak = row.cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    double threshold =
        AbsQuantile(std::span<const double>(row.data(), row.size()),
                    cfg.percentile);
    // A mostly-silent channel can have a zero percentile; clipping there
    // would erase it, so only rescale.
    if (threshold <= 0.0) threshold = peak;
    row = row.cwiseMax(-threshold).cwiseMin(threshold);
    row *= cfg.target_peak / std::min(threshold, peak);
  }
  return out;
}

}  // namespace farfield::preprocess
