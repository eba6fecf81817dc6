#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "farfield/core/audio.h"

namespace farfield {

enum class Window { kHann, kSqrtHann };
enum class Padding { kNone, kCenter };

struct StftParams {
  int frame_length = 1024;
  int frame_shift = 256;
  Window window = Window::kHann;
  Padding padding = Padding::kCenter;

  int num_bins() const { return frame_length / 2 + 1; }
  // Throws std::invalid_argument unless 0 < frame_shift <= frame_length.
  void Validate() const;
  // True if the squared window overlap-adds to a constant at this shift.
  bool IsCola() const;
  // Number of analysis frames produced for a signal of `num_samples`.
  int NumFrames(Eigen::Index num_samples) const;
  // Time in seconds of the center of frame `k`.
  double FrameCenterSeconds(int k, int sample_rate) const;
  std::vector<double> WindowCoefficients() const;

  bool operator==(const StftParams&) const = default;
};

// Complex STFT values indexed (channel, frame, bin). Storage keeps each
// frequency bin as a contiguous (channels x frames) block so that per-bin
// algorithms can map it as a matrix without copying.
class SpectralTensor {
 public:
  using BinMatrix = Eigen::Map<Eigen::MatrixXcd>;
  using ConstBinMatrix = Eigen::Map<const Eigen::MatrixXcd>;

  SpectralTensor() = default;
  SpectralTensor(int channels, int frames, int bins);

  int channels() const { return channels_; }
  int frames() const { return frames_; }
  int bins() const { return bins_; }

  std::complex<double>& operator()(int c, int t, int f) {
    return data_[Index(c, t, f)];
  }
  const std::complex<double>& operator()(int c, int t, int f) const {
    return data_[Index(c, t, f)];
  }

  BinMatrix Bin(int f) {
    return BinMatrix(data_.data() + Offset(f), channels_, frames_);
  }
  ConstBinMatrix Bin(int f) const {
    return ConstBinMatrix(data_.data() + Offset(f), channels_, frames_);
  }

  // Copy of frames [begin, end).
  SpectralTensor Frames(int begin, int end) const;
  SpectralTensor SelectChannels(const std::vector<int>& channels) const;

  double SquaredNorm() const;

  // Analysis metadata carried alongside the values.
  StftParams params;
  int sample_rate = 16000;
  Eigen::Index num_samples = 0;

 private:
  std::size_t Offset(int f) const {
    return static_cast<std::size_t>(f) * channels_ * frames_;
  }
  std::size_t Index(int c, int t, int f) const {
    return Offset(f) + static_cast<std::size_t>(t) * channels_ + c;
  }

  int channels_ = 0;
  int frames_ = 0;
  int bins_ = 0;
  std::vector<std::complex<double>> data_;
};

SpectralTensor Stft(const MultichannelAudio& audio, const StftParams& params);

// Weighted overlap-add synthesis with the analysis window. The output has
// `tensor.num_samples` samples per channel.
MultichannelAudio Istft(const SpectralTensor& tensor, const StftParams& params);

// Energy of a windowed frame computed from its one-sided spectrum.
double OneSidedSpectrumEnergy(const Eigen::VectorXcd& spectrum,
                              int frame_length);

}  // namespace farfield
