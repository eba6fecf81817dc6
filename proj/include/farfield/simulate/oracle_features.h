#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "farfield/core/segmentation.h"
#include "farfield/diarize/embedding_set.h"
#include "farfield/fusion/soft_activity.h"

namespace farfield::simulate {

// Synthetic speaker embeddings for a known segmentation: every speaker owns
// a random unit centroid and each frame vector is the centroid plus Gaussian
// noise, renormalized. Frames with two active speakers carry one vector per
// speaker; silent frames are omitted.
struct OracleEmbeddingConfig {
  int dim = 32;
  double frame_step = 0.1;
  // Total within-speaker standard deviation over the smallest distance
  // between centroids.
  double spread_ratio = 0.2;
};

diarize::EmbeddingSet OracleEmbeddings(const Segmentation& reference,
                                       const std::vector<std::string>& speakers,
                                       const Eigen::MatrixXd& centroids,
                                       const OracleEmbeddingConfig& cfg,
                                       std::uint64_t seed);

// `speakers` random unit vectors in `dim` dimensions (rows).
Eigen::MatrixXd RandomCentroids(int speakers, int dim, std::uint64_t seed);

// Noisy soft activity: 0.85 on active and 0.1 on silent frames, blurred by
// Gaussian noise of standard deviation `noise` and clipped to [0, 1].
fusion::SoftActivity OracleActivity(const Segmentation& reference,
                                    const std::vector<std::string>& speakers,
                                    double frame_step, int frames, double noise,
                                    std::uint64_t seed);

}  // namespace farfield::simulate
