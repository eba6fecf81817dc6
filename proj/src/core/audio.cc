#include "farfield/core/audio.h"

#include <string>

#include "farfield/core/errors.h"

namespace farfield {

void MultichannelAudio::Validate() const {
  if (sample_rate <= 0) {
    throw DataError("sample rate must be positive, got " +
                    std::to_string(sample_rate));
  }
  if (!samples.allFinite()) throw DataError("audio contains non-finite samples");
}

MultichannelAudio MultichannelAudio::SelectChannels(
    std::span<const int> channels) const {
  SampleMatrix out(static_cast<Eigen::Index>(channels.size()), length());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const int c = channels[i];
    if (c < 0 || c >= this->channels()) {
      throw DataError("channel index " + std::to_string(c) + " out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = samples.row(c);
  }
  return {std::move(out), sample_rate};
}

MultichannelAudio MultichannelAudio::Slice(Eigen::Index begin,
                                           Eigen::Index end) const {
  if (end < begin) end = begin;
  SampleMatrix out = SampleMatrix::Zero(channels(), end - begin);
  const Eigen::Index lo = std::max<Eigen::Index>(begin, 0);
  const Eigen::Index hi = std::min(end, length());
  if (hi > lo) {
    out.middleCols(lo - begin, hi - lo) = samples.middleCols(lo, hi - lo);
  }
  return {std::move(out), sample_rate};
}

}  // namespace farfield
