#include "farfield/diarize/diarizer.h"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

#include "farfield/core/errors.h"

namespace farfield::diarize {
namespace {

int NearestCluster(const ClusterSet& clusters, const std::vector<int>& ids,
                   const Eigen::VectorXd& v) {
  int best = kUnassigned;
  double best_cos = -std::numeric_limits<double>::infinity();
  int best_size = -1;
  for (int id : ids) {
    const Cluster& c = clusters.Get(id);
    const double cos = CosineSimilarity(c.centroid, v);
    // Ids ascend, so ties fall to the larger, then lower-id cluster.
    if (cos > best_cos || (cos == best_cos && c.size > best_size)) {
      best = id;
      best_cos = cos;
      best_size = c.size;
    }
  }
  return best;
}

}  // namespace

Segmentation AssignMixedFrames(const ClusterSet& clusters,
                               const EmbeddingSet& single,
                               const EmbeddingSet& mixed, double frame_step) {
  std::vector<int> ids = clusters.SurvivingIds();
  if (ids.empty()) throw DataError("assign_mixed_frames: no surviving clusters");
  std::sort(ids.begin(), ids.end());
  if (single.entries.size() != clusters.assignments.size()) {
    throw DataError("assign_mixed_frames: assignments do not match frames");
  }

  std::map<int, std::vector<std::pair<double, double>>> spans;
  for (std::size_t i = 0; i < single.entries.size(); ++i) {
    const auto& e = single.entries[i];
    int id = clusters.assignments[i];
    if (id == kUnassigned) id = NearestCluster(clusters, ids, e.vectors.front());
    spans[id].emplace_back(e.start, e.end);
  }
  for (const auto& e : mixed.entries) {
    std::vector<int> active;
    for (const auto& v : e.vectors) active.push_back(NearestCluster(clusters, ids, v));
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
    for (int id : active) spans[id].emplace_back(e.start, e.end);
  }

  Segmentation seg;
  const double bridge = 0.5 * frame_step;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    auto& list = spans[ids[k]];
    std::sort(list.begin(), list.end());
    const std::string label = "spk" + std::to_string(k);
    for (const auto& [start, end] : list) {
      if (!seg.turns.empty() && seg.turns.back().speaker == label &&
          start - seg.turns.back().end < bridge) {
        seg.turns.back().end = std::max(seg.turns.back().end, end);
      } else {
        seg.turns.push_back({label, start, end});
      }
    }
  }
  seg.Sort();
  return seg;
}

DiarizationResult Diarize(const EmbeddingSet& embeddings,
                          const DiarizeConfig& cfg,
                          const DiarizeOptions& options) {
  cfg.Validate();
  embeddings.Validate();
  const FrameSplit split =
      SelectSingleSpeakerFrames(embeddings, cfg.single_speaker_threshold);
  const auto n = static_cast<Eigen::Index>(split.single.entries.size());
  if (n == 0) throw DataError("diarize: no single-speaker frames");

  Eigen::MatrixXd vectors(n, embeddings.dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    vectors.row(i) = split.single.entries[i].vectors.front().transpose();
  }
  Eigen::MatrixXd reduced;
  if (options.reduction == Reduction::kExternal) {
    reduced = ReduceDim(vectors, embeddings.dim, Reduction::kExternal);
  } else if (n >= 2) {
    const int target = std::min<int>({cfg.reduced_dim, embeddings.dim,
                                      static_cast<int>(n) - 1});
    reduced = ReduceDim(vectors, target, Reduction::kLinear);
  } else {
    reduced = vectors;
  }

  DiarizeConfig local = cfg;
  local.max_clusters = std::min<int>(cfg.max_clusters, static_cast<int>(n));
  ClusterSet clusters = GmmCluster(reduced, local, options.seed);
  RecomputeCentroids(clusters, vectors);
  RejectClusters(clusters, options.is_nonspeech);
  clusters = MergeRejectClusters(std::move(clusters), cfg);

  DiarizationResult result;
  result.segmentation =
      AssignMixedFrames(clusters, split.single, split.mixed, cfg.frame_step);
  result.segmentation.session_id = embeddings.source_tag;
  result.num_speakers = CountSpeakers(clusters);
  result.clusters = std::move(clusters);
  return result;
}

}  // namespace farfield::diarize
