#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace farfield::diarize {

inline constexpr int kUnassigned = -1;

struct DiarizeConfig {
  double merge_cos_threshold = 0.75;
  double reject_thr = 10.0;
  int max_clusters = 8;
  int reduced_dim = 12;
  double frame_step = 0.1;                 // seconds
  double single_speaker_threshold = 0.7;   // cosine, for multi-vector entries
  int max_em_iterations = 200;
  double em_tolerance = 1e-8;

  void Validate() const;
};

struct Cluster {
  int id = 0;
  Eigen::VectorXd centroid;  // unit length
  int size = 0;
  bool rejected = false;
};

// Frame-to-cluster assignment after clustering. Rejected clusters keep their
// size for reporting but no longer own any frames.
struct ClusterSet {
  std::vector<int> assignments;  // per frame, cluster id or kUnassigned
  std::vector<Cluster> clusters;

  int MaxSize() const;
  std::vector<int> SurvivingIds() const;
  int NumSurviving() const;
  const Cluster& Get(int id) const;
  Cluster& Get(int id);
};

struct GmmFit {
  Eigen::MatrixXd means;      // components x dim
  Eigen::MatrixXd variances;  // components x dim
  Eigen::VectorXd weights;
  std::vector<int> labels;    // argmax responsibility per point
  std::vector<double> log_likelihood;  // mean per-point, per EM iteration
};

// Diagonal-covariance EM with k-means++ seeding (variance floor 1e-6).
// Components that lose all responsibility are dropped; fewer than `k`
// components are used when the data has fewer distinct points.
GmmFit FitDiagonalGmm(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                      int max_iterations = 200, double tolerance = 1e-8);

// Clusters rows of `points` into at most cfg.max_clusters groups; centroids
// are normalized cluster means in the input space.
ClusterSet GmmCluster(const Eigen::MatrixXd& points, const DiarizeConfig& cfg,
                      std::uint64_t seed);

// Replaces centroids with normalized means of `vectors` (rows aligned with
// the clustered frames).
void RecomputeCentroids(ClusterSet& clusters, const Eigen::MatrixXd& vectors);

// Merges the most similar centroid pair while its cosine exceeds the
// threshold, then rejects clusters smaller than N_max / reject_thr.
ClusterSet MergeRejectClusters(ClusterSet clusters, const DiarizeConfig& cfg);

// Rejects every surviving cluster for which `is_nonspeech` holds.
void RejectClusters(ClusterSet& clusters,
                    const std::function<bool(const Cluster&)>& is_nonspeech);

int CountSpeakers(const ClusterSet& clusters);

}  // namespace farfield::diarize
