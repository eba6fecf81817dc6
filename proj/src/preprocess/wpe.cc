#include "farfield/preprocess/wpe.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "farfield/core/errors.h"

namespace farfield::preprocess {
namespace {

// (channels * taps) x frames matrix of delayed observations.
Eigen::MatrixXcd StackDelayed(const Eigen::MatrixXcd& x, int taps, int delay) {
  const Eigen::Index d = x.rows();
  const Eigen::Index t = x.cols();
  Eigen::MatrixXcd stacked = Eigen::MatrixXcd::Zero(d * taps, t);
  for (int k = 0; k < taps; ++k) {
    const Eigen::Index shift = delay + k;
    if (shift >= t) break;
    stacked.block(k * d, shift, d, t - shift) = x.leftCols(t - shift);
  }
  return stacked;
}

}  // namespace

void WpeConfig::Validate() const {
  if (taps < 1 || delay < 1 || iterations < 1 || !(block_seconds > 0.0)) {
    throw ConfigError(
        "WPE requires taps >= 1, delay >= 1, iterations >= 1, block > 0");
  }
}

Eigen::MatrixXcd ApplyPrediction(const Eigen::MatrixXcd& observation,
                                 const PredictionFilter& filter, int taps,
                                 int delay) {
  return observation -
         filter.adjoint() * StackDelayed(observation, taps, delay);
}

Eigen::MatrixXcd WpeBin(const Eigen::MatrixXcd& observation,
                        const WpeConfig& cfg) {
  const Eigen::Index d = observation.rows();
  const Eigen::MatrixXcd stacked =
      StackDelayed(observation, cfg.taps, cfg.delay);
  Eigen::MatrixXcd estimate = observation;
  for (int it = 0; it < cfg.iterations; ++it) {
    Eigen::VectorXd power =
        estimate.cwiseAbs2().colwise().sum().transpose() / static_cast<double>(d);
    const double peak = power.maxCoeff();
    if (peak <= 0.0) return observation;
    power = power.cwiseMax(1e-10 * peak);
    const Eigen::MatrixXcd weighted =
        stacked * power.cwiseInverse().asDiagonal();
    Eigen::MatrixXcd corr = weighted * stacked.adjoint();
    const Eigen::MatrixXcd cross = weighted * observation.adjoint();
    const double trace = corr.trace().real();
    if (trace <= 0.0) return observation;
    corr.diagonal().array() += cfg.diagonal_loading * trace;
    Eigen::LLT<Eigen::MatrixXcd> llt(corr);
    PredictionFilter filter;
    if (llt.info() == Eigen::Success) {
      filter = llt.solve(cross);
    } else {
      Eigen::LDLT<Eigen::MatrixXcd> ldlt(corr);
      if (ldlt.info() != Eigen::Success) {
        throw NumericalError("WPE correlation matrix is singular");
      }
      filter = ldlt.solve(cross);
    }
    if (!filter.allFinite()) {
      throw NumericalError("WPE filter estimate is not finite");
    }
    estimate = observation - filter.adjoint() * stacked;
  }
  return estimate;
}

SpectralTensor WpeDereverberate(const SpectralTensor& tensor,
                                const WpeConfig& cfg) {
  cfg.Validate();
  const int min_frames = cfg.taps + cfg.delay;
  if (tensor.frames() < min_frames) {
    throw DataError("WPE needs at least taps + delay = " +
                    std::to_string(min_frames) + " frames, got " +
                    std::to_string(tensor.frames()));
  }
  const int block = std::max(
      min_frames + 1,
      static_cast<int>(std::lround(cfg.block_seconds * tensor.sample_rate /
                                   tensor.params.frame_shift)));
  std::vector<std::pair<int, int>> blocks;
  for (int start = 0; start < tensor.frames(); start += block) {
    const int end = std::min(start + block, tensor.frames());
    if (!blocks.empty() && end - start <= min_frames) {
      blocks.back().second = end;
    } else {
      blocks.emplace_back(start, end);
    }
  }

  SpectralTensor out = tensor;
  for (int f = 0; f < tensor.bins(); ++f) {
    const auto bin = tensor.Bin(f);
    auto dst = out.Bin(f);
    for (const auto& [start, end] : blocks) {
      dst.middleCols(start, end - start) =
          WpeBin(bin.middleCols(start, end - start), cfg);
    }
  }
  return out;
}

}  // namespace farfield::preprocess
