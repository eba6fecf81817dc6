#include "farfield/preprocess/channel_rank.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "farfield/core/errors.h"
#include "farfield/core/stft.h"

namespace farfield::preprocess {
namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

Eigen::MatrixXd MelFilterbank(int num_bands, int num_bins, int sample_rate,
                              double min_hz, double max_hz) {
  const int fft_len = 2 * (num_bins - 1);
  max_hz = std::min(max_hz, sample_rate / 2.0);
  const double lo = HzToMel(min_hz);
  const double hi = HzToMel(max_hz);
  std::vector<double> edges(num_bands + 2);
  for (int i = 0; i < num_bands + 2; ++i) {
    edges[i] = MelToHz(lo + (hi - lo) * i / (num_bands + 1));
  }
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(num_bands, num_bins);
  for (int b = 0; b < num_bands; ++b) {
    const double left = edges[b], center = edges[b + 1], right = edges[b + 2];
    for (int k = 0; k < num_bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / fft_len;
      if (hz > left && hz < right) {
        fb(b, k) = hz <= center ? (hz - left) / (center - left)
                                : (right - hz) / (right - center);
      }
    }
  }
  return fb;
}

ChannelRanking EnvelopeVarianceRank(const MultichannelAudio& audio,
                                    const EnvelopeVarianceConfig& cfg) {
  if (audio.channels() < 1 || audio.empty()) {
    throw DataError("envelope_variance_rank: no audio");
  }
  const int channels = audio.channels();
  StftParams params;
  params.frame_length = cfg.frame_length;
  params.frame_shift = cfg.frame_shift;
  const SpectralTensor spec = Stft(audio, params);
  const Eigen::MatrixXd fb = MelFilterbank(
      cfg.num_bands, spec.bins(), audio.sample_rate, cfg.min_hz, cfg.max_hz);

  Eigen::MatrixXd variances = Eigen::MatrixXd::Zero(channels, cfg.num_bands);
  std::vector<bool> silent(channels, false);
  for (int c = 0; c < channels; ++c) {
    if (audio.samples.row(c).cwiseAbs().maxCoeff() == 0.0) {
      silent[c] = true;
      continue;
    }
    Eigen::MatrixXd power(spec.bins(), spec.frames());
    for (int f = 0; f < spec.bins(); ++f) {
      power.row(f) = spec.Bin(f).row(c).cwiseAbs2();
    }
    Eigen::MatrixXd bands = fb * power;  // bands x frames
    // Floor relative to the channel's own level keeps the score gain-invariant.
    const double floor = 1e-10 * std::max(bands.mean(), 1e-300);
    Eigen::MatrixXd env = (bands.array() + floor).log().matrix();
    for (int b = 0; b < cfg.num_bands; ++b) {
      const Eigen::ArrayXd row = env.row(b).array() - env.row(b).mean();
      variances(c, b) = row.square().mean();
    }
  }

  ChannelRanking ranking;
  ranking.scores.assign(channels, 0.0);
  for (int b = 0; b < cfg.num_bands; ++b) {
    const double peak = variances.col(b).maxCoeff();
    if (peak <= 0.0) continue;
    for (int c = 0; c < channels; ++c) {
      if (!silent[c]) ranking.scores[c] += variances(c, b) / peak;
    }
  }
  for (double& s : ranking.scores) s /= cfg.num_bands;

  ranking.order.resize(channels);
  std::iota(ranking.order.begin(), ranking.order.end(), 0);
  std::stable_sort(ranking.order.begin(), ranking.order.end(),
                   [&](int a, int b) {
                     if (silent[a] != silent[b]) return !silent[a];
                     return ranking.scores[a] > ranking.scores[b];
                   });
  return ranking;
}

std::vector<int> SelectTopChannels(const ChannelRanking& ranking,
                                   double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("channel selection fraction must be in (0, 1]");
  }
  const auto total = static_cast<double>(ranking.order.size());
  const auto count = static_cast<std::size_t>(
      std::clamp(std::ceil(fraction * total - 1e-9), 1.0, total));
  std::vector<int> chosen(ranking.order.begin(),
                          ranking.order.begin() + static_cast<long>(count));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace farfield::preprocess
