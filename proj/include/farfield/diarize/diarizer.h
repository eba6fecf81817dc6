#pragma once

#include <cstdint>
#include <functional>

#include "farfield/core/segmentation.h"
#include "farfield/diarize/clustering.h"
#include "farfield/diarize/embedding_set.h"
#include "farfield/diarize/reduce.h"

namespace farfield::diarize {

// Attracts every mixed vector and every unassigned single frame to the
// nearest surviving centroid (cosine; ties go to the larger, then lower-id
// cluster) and joins contiguous frames of a speaker into turns. `single`
// entries align with `clusters.assignments`.
Segmentation AssignMixedFrames(const ClusterSet& clusters,
                               const EmbeddingSet& single,
                               const EmbeddingSet& mixed, double frame_step);

struct DiarizationResult {
  Segmentation segmentation;
  ClusterSet clusters;
  int num_speakers = 0;
};

struct DiarizeOptions {
  Reduction reduction = Reduction::kLinear;
  std::uint64_t seed = 0;
  std::function<bool(const Cluster&)> is_nonspeech;  // optional
};

// Single-speaker frame selection, dimensionality reduction, GMM clustering,
// merge/reject and mixed-frame attraction.
DiarizationResult Diarize(const EmbeddingSet& embeddings,
                          const DiarizeConfig& cfg,
                          const DiarizeOptions& options = {});

}  // namespace farfield::diarize
