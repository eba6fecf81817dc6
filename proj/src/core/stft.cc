#include "farfield/core/stft.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/FFT>

#include "farfield/core/errors.h"

namespace farfield {

void StftParams::Validate() const {
  if (frame_length <= 0 || frame_shift <= 0 || frame_shift > frame_length) {
    throw std::invalid_argument(
        "STFT requires 0 < frame_shift <= frame_length (got shift " +
        std::to_string(frame_shift) + ", length " +
        std::to_string(frame_length) + ")");
  }
}

std::vector<double> StftParams::WindowCoefficients() const {
  // Periodic Hann, the variant that overlap-adds exactly.
  std::vector<double> w(frame_length);
  for (int n = 0; n < frame_length; ++n) {
    const double h =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / frame_length);
    w[n] = window == Window::kHann ? h : std::sqrt(h);
  }
  return w;
}

bool StftParams::IsCola() const {
  const std::vector<double> w = WindowCoefficients();
  std::vector<double> sum(frame_shift, 0.0);
  for (int n = 0; n < frame_length; ++n) sum[n % frame_shift] += w[n] * w[n];
  const auto [lo, hi] = std::minmax_element(sum.begin(), sum.end());
  return *hi > 0.0 && (*hi - *lo) <= 1e-10 * *hi;
}

int StftParams::NumFrames(Eigen::Index num_samples) const {
  if (padding == Padding::kCenter) {
    return static_cast<int>(num_samples / frame_shift) + 1;
  }
  if (num_samples < frame_length) return 0;
  return static_cast<int>((num_samples - frame_length) / frame_shift) + 1;
}

double StftParams::FrameCenterSeconds(int k, int sample_rate) const {
  const double offset = padding == Padding::kCenter ? 0.0 : frame_length / 2.0;
  return (static_cast<double>(k) * frame_shift + offset) / sample_rate;
}

SpectralTensor::SpectralTensor(int channels, int frames, int bins)
    : channels_(channels),
      frames_(frames),
      bins_(bins),
      data_(static_cast<std::size_t>(channels) * frames * bins) {}

SpectralTensor SpectralTensor::Frames(int begin, int end) const {
  begin = std::clamp(begin, 0, frames_);
  end = std::clamp(end, begin, frames_);
  SpectralTensor out(channels_, end - begin, bins_);
  out.params = params;
  out.sample_rate = sample_rate;
  out.num_samples = static_cast<Eigen::Index>(end - begin) * params.frame_shift;
  for (int f = 0; f < bins_; ++f) {
    out.Bin(f) = Bin(f).middleCols(begin, end - begin);
  }
  return out;
}

SpectralTensor SpectralTensor::SelectChannels(
    const std::vector<int>& channels) const {
  SpectralTensor out(static_cast<int>(channels.size()), frames_, bins_);
  out.params = params;
  out.sample_rate = sample_rate;
  out.num_samples = num_samples;
  for (int f = 0; f < bins_; ++f) {
    for (std::size_t i = 0; i < channels.size(); ++i) {
      out.Bin(f).row(static_cast<Eigen::Index>(i)) = Bin(f).row(channels[i]);
    }
  }
  return out;
}

double SpectralTensor::SquaredNorm() const {
  double acc = 0.0;
  for (const auto& v : data_) acc += std::norm(v);
  return acc;
}

SpectralTensor Stft(const MultichannelAudio& audio, const StftParams& params) {
  params.Validate();
  if (audio.empty()) throw DataError("stft: empty audio");
  const Eigen::Index n = audio.length();
  if (params.padding == Padding::kNone && n < params.frame_length) {
    throw DataError("stft: frame length " +
                    std::to_string(params.frame_length) +
                    " exceeds signal length " + std::to_string(n) +
                    " without padding");
  }
  const int frames = params.NumFrames(n);
  const int bins = params.num_bins();
  const int len = params.frame_length;
  const Eigen::Index pad_left =
      params.padding == Padding::kCenter ? len / 2 : 0;
  const std::vector<double> window = params.WindowCoefficients();

  SpectralTensor out(audio.channels(), frames, bins);
  out.params = params;
  out.sample_rate = audio.sample_rate;
  out.num_samples = n;

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(len);
  std::vector<std::complex<double>> spectrum;
  for (int c = 0; c < audio.channels(); ++c) {
    const auto row = audio.samples.row(c);
    for (int t = 0; t < frames; ++t) {
      const Eigen::Index start =
          static_cast<Eigen::Index>(t) * params.frame_shift - pad_left;
      for (int i = 0; i < len; ++i) {
        const Eigen::Index idx = start + i;
        frame[i] = (idx >= 0 && idx < n) ? row(idx) * window[i] : 0.0;
      }
      fft.fwd(spectrum, frame);
      for (int f = 0; f < bins; ++f) out(c, t, f) = spectrum[f];
    }
  }
  return out;
}

MultichannelAudio Istft(const SpectralTensor& tensor,
                        const StftParams& params) {
  params.Validate();
  if (!(params == tensor.params)) {
    throw std::invalid_argument(
        "istft: synthesis parameters differ from analysis parameters");
  }
  if (!params.IsCola()) {
    throw std::invalid_argument(
        "istft: window/shift combination is not constant-overlap-add");
  }
  const int len = params.frame_length;
  const Eigen::Index n = tensor.num_samples;
  const Eigen::Index pad_left =
      params.padding == Padding::kCenter ? len / 2 : 0;
  const std::vector<double> window = params.WindowCoefficients();

  // Per-sample normalization by the accumulated squared window recovers the
  // signal exactly wherever at least one frame contributes.
  std::vector<double> norm(n, 0.0);
  for (int t = 0; t < tensor.frames(); ++t) {
    const Eigen::Index start =
        static_cast<Eigen::Index>(t) * params.frame_shift - pad_left;
    for (int i = 0; i < len; ++i) {
      const Eigen::Index idx = start + i;
      if (idx >= 0 && idx < n) norm[idx] += window[i] * window[i];
    }
  }
  double peak = 0.0;
  for (double v : norm) peak = std::max(peak, v);
  const double floor = 1e-10 * peak;

  MultichannelAudio out = MultichannelAudio::Zeros(tensor.channels(), n,
                                                   tensor.sample_rate);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> spectrum(tensor.bins());
  std::vector<double> frame;
  for (int c = 0; c < tensor.channels(); ++c) {
    auto row = out.samples.row(c);
    for (int t = 0; t < tensor.frames(); ++t) {
      for (int f = 0; f < tensor.bins(); ++f) spectrum[f] = tensor(c, t, f);
      fft.inv(frame, spectrum, len);
      const Eigen::Index start =
          static_cast<Eigen::Index>(t) * params.frame_shift - pad_left;
      for (int i = 0; i < len; ++i) {
        const Eigen::Index idx = start + i;
        if (idx >= 0 && idx < n) row(idx) += frame[i] * window[i];
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      row(i) = norm[i] > floor ? row(i) / norm[i] : 0.0;
    }
  }
  return out;
}

double OneSidedSpectrumEnergy(const Eigen::VectorXcd& spectrum,
                              int frame_length) {
  double acc = 0.0;
  const Eigen::Index bins = spectrum.size();
  for (Eigen::Index f = 0; f < bins; ++f) {
    const bool unpaired = f == 0 || (frame_length % 2 == 0 && f == bins - 1);
    acc += (unpaired ? 1.0 : 2.0) * std::norm(spectrum(f));
  }
  return acc / frame_length;
}

}  // namespace farfield
