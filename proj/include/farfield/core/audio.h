#pragma once

#include <span>

#include <Eigen/Dense>

namespace farfield {

using SampleMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Time-domain samples, one row per channel.
struct MultichannelAudio {
  SampleMatrix samples;
  int sample_rate = 16000;

  MultichannelAudio() = default;
  MultichannelAudio(SampleMatrix s, int rate)
      : samples(std::move(s)), sample_rate(rate) {}

  static MultichannelAudio Zeros(int channels, Eigen::Index length, int rate) {
    return {SampleMatrix::Zero(channels, length), rate};
  }

  int channels() const { return static_cast<int>(samples.rows()); }
  Eigen::Index length() const { return samples.cols(); }
  double duration() const {
    return static_cast<double>(length()) / sample_rate;
  }
  bool empty() const { return samples.size() == 0; }

  // Throws DataError if the rate is not positive or any sample is not finite.
  void Validate() const;

  MultichannelAudio SelectChannels(std::span<const int> channels) const;
  // Samples [begin, end) clamped to the signal; out-of-range parts are zero.
  MultichannelAudio Slice(Eigen::Index begin, Eigen::Index end) const;
};

}  // namespace farfield
