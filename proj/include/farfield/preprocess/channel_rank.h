#pragma once

#include <vector>

#include "farfield/core/audio.h"

namespace farfield::preprocess {

struct ChannelRanking {
  std::vector<double> scores;  // per channel
  std::vector<int> order;      // channel indices, best first
};

struct EnvelopeVarianceConfig {
  int num_bands = 40;
  double min_hz = 20.0;
  double max_hz = 7600.0;
  int frame_length = 1024;
  int frame_shift = 256;
};

// Envelope-variance channel quality. Each channel's mel-band log envelopes
// are mean-removed; per band the variance is normalized by the maximum over
// channels, and the score is the mean over bands. Reverberation and noise
// smear the envelopes and lower the score. Silent channels score 0 and rank
// last; ties keep channel order.
ChannelRanking EnvelopeVarianceRank(const MultichannelAudio& audio,
                                    const EnvelopeVarianceConfig& cfg = {});

// The ceil(fraction * C) best channels, returned in ascending channel order.
std::vector<int> SelectTopChannels(const ChannelRanking& ranking,
                                   double fraction);

// Triangular mel filterbank over `num_bins` one-sided FFT bins;
// rows are bands.
Eigen::MatrixXd MelFilterbank(int num_bands, int num_bins, int sample_rate,
                              double min_hz, double max_hz);

}  // namespace farfield::preprocess
