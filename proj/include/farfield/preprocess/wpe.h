#pragma once

#include <Eigen/Dense>

#include "farfield/core/stft.h"

namespace farfield::preprocess {

struct WpeConfig {
  int taps = 10;
  int delay = 2;  // frames
  int iterations = 3;
  double block_seconds = 120.0;
  double diagonal_loading = 1e-10;  // relative to the correlation trace

  void Validate() const;
};

// Multichannel linear prediction filter of one frequency bin, stacked as
// (channels * taps) x channels. Row block k holds the taps applied to the
// observation delayed by `delay + k` frames.
using PredictionFilter = Eigen::MatrixXcd;

// Subtracts the delayed prediction: y_t = x_t - G^H [x_{t-d}; ...; x_{t-d-K+1}].
Eigen::MatrixXcd ApplyPrediction(const Eigen::MatrixXcd& observation,
                                 const PredictionFilter& filter, int taps,
                                 int delay);

// Iterative variance-weighted WPE on one (channels x frames) bin matrix.
Eigen::MatrixXcd WpeBin(const Eigen::MatrixXcd& observation,
                        const WpeConfig& cfg);

// Block-wise WPE over every bin. Blocks of `block_seconds` are processed
// independently; a trailing block too short to estimate a filter is merged
// into its predecessor.
SpectralTensor WpeDereverberate(const SpectralTensor& tensor,
                                const WpeConfig& cfg);

}  // namespace farfield::preprocess
