#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "farfield/core/stft.h"
#include "farfield/fusion/soft_activity.h"
#include "farfield/preprocess/wpe.h"

namespace farfield::gss {

struct GssConfig {
  int iterations = 5;
  double context_margin = 0.5;       // seconds added on both sides of a turn
  std::optional<int> chunk_frames;   // e.g. 300; unset processes in one piece
  bool add_noise_source = true;
  double noise_floor = 0.01;         // minimum prior of the noise source
  bool reestimate_priors = false;    // activity-gated per-bin mixture weights
  bool wpe_enabled = true;
  preprocess::WpeConfig wpe{10, 2, 1, 120.0, 1e-10};
  StftParams stft;

  void Validate() const;
};

// Time-frequency masks, one (sources x frames) matrix per frequency bin.
// Columns sum to one.
struct MaskTensor {
  std::vector<Eigen::MatrixXd> bins;

  int sources() const { return bins.empty() ? 0 : static_cast<int>(bins[0].rows()); }
  int frames() const { return bins.empty() ? 0 : static_cast<int>(bins[0].cols()); }
  int num_bins() const { return static_cast<int>(bins.size()); }
  double operator()(int s, int t, int f) const { return bins[f](s, t); }
};

struct CacgmmState {
  // shape_matrices[f][s]: Hermitian PD, trace equal to the channel count.
  std::vector<std::vector<Eigen::MatrixXcd>> shape_matrices;
  Eigen::MatrixXd priors;  // sources x frames, columns sum to one
};

struct CacgmmResult {
  MaskTensor masks;
  CacgmmState state;
  // Per bin: mean log-likelihood before the first and after every iteration.
  std::vector<std::vector<double>> log_likelihood;
};

// Frame-level source priors from speaker activities: one row per activity
// speaker plus, optionally, a noise row max(1 - sum, noise_floor). Frame k of
// `tensor` is looked up at time `start_time` + its center time.
Eigen::MatrixXd BuildPriors(const fusion::SoftActivity& activities,
                            const SpectralTensor& tensor, double start_time,
                            bool add_noise_source, double noise_floor);

// Complex angular-central Gaussian log density (including the normalizer).
double CacgLogDensity(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& shape);

// EM on one bin: `observation` is (channels x frames), `priors` (sources x
// frames). The priors guide the posterior and stay fixed unless
// `reestimate_priors` is set.
CacgmmResult CacgmmBin(const Eigen::MatrixXcd& observation,
                       const Eigen::MatrixXd& priors, int iterations,
                       bool reestimate_priors);

// Guided cACGMM over all bins.
CacgmmResult CacgmmEm(const SpectralTensor& tensor,
                      const fusion::SoftActivity& activities,
                      const GssConfig& cfg, double start_time = 0.0);

// Non-overlapping chunks of `chunk_frames`; a final chunk shorter than two
// frames joins its predecessor.
std::vector<std::pair<int, int>> ChunkBounds(int frames, int chunk_frames);

// CacgmmEm run independently per chunk; masks are concatenated in time.
CacgmmResult ChunkedCacgmm(const SpectralTensor& tensor,
                           const fusion::SoftActivity& activities,
                           const GssConfig& cfg, double start_time = 0.0);

// Elementwise product of activities and a 0/1 mask of the same shape.
fusion::SoftActivity ApplyVadMask(const fusion::SoftActivity& activities,
                                  const Eigen::MatrixXd& vad);

}  // namespace farfield::gss
