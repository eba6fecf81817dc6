#include "farfield/simulate/oracle_features.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "farfield/core/errors.h"

namespace farfield::simulate {

Eigen::MatrixXd RandomCentroids(int speakers, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd c(speakers, dim);
  for (int s = 0; s < speakers; ++s) {
    for (int d = 0; d < dim; ++d) c(s, d) = normal(rng);
    c.row(s).normalize();
  }
  return c;
}

diarize::EmbeddingSet OracleEmbeddings(const Segmentation& reference,
                                       const std::vector<std::string>& speakers,
                                       const Eigen::MatrixXd& centroids,
                                       const OracleEmbeddingConfig& cfg,
                                       std::uint64_t seed) {
  if (centroids.rows() != static_cast<Eigen::Index>(speakers.size()) ||
      centroids.cols() != cfg.dim) {
    throw ConfigError("centroid matrix does not match the speakers");
  }
  if (!(cfg.frame_step > 0.0) || cfg.spread_ratio < 0.0) {
    throw ConfigError("invalid oracle embedding settings");
  }
  double min_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < centroids.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < centroids.rows(); ++b) {
      min_dist = std::min(min_dist, (centroids.row(a) - centroids.row(b)).norm());
    }
  }
  if (!std::isfinite(min_dist)) min_dist = 1.0;
  const double sigma = cfg.spread_ratio * min_dist / std::sqrt(static_cast<double>(cfg.dim));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  diarize::EmbeddingSet set;
  set.dim = cfg.dim;
  set.source_tag = "oracle";
  const auto frames = static_cast<int>(std::ceil(reference.End() / cfg.frame_step));
  for (int t = 0; t < frames; ++t) {
    const double center = (t + 0.5) * cfg.frame_step;
    diarize::EmbeddingEntry entry{t * cfg.frame_step, (t + 1) * cfg.frame_step, {}};
    for (std::size_t s = 0; s < speakers.size(); ++s) {
      const bool active = std::any_of(reference.turns.begin(), reference.turns.end(),
                                      [&](const Turn& turn) {
                                        return turn.speaker == speakers[s] &&
                                               turn.start <= center && center < turn.end;
                                      });
      if (!active) continue;
      Eigen::VectorXd v = centroids.row(static_cast<Eigen::Index>(s)).transpose();
      for (auto& x : v) x += normal(rng);
      entry.vectors.push_back(v.normalized());
    }
    if (!entry.vectors.empty()) set.entries.push_back(std::move(entry));
  }
  return set;
}

fusion::SoftActivity OracleActivity(const Segmentation& reference,
                                    const std::vector<std::string>& speakers,
                                    double frame_step, int frames, double noise,
                                    std::uint64_t seed) {
  fusion::SoftActivity act = fusion::Rasterize(reference, speakers, frame_step, frames);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, noise);
  act.probs = (0.1 + 0.75 * act.probs.array()).matrix();
  if (noise > 0.0) {
    for (Eigen::Index i = 0; i < act.probs.size(); ++i) act.probs(i) += normal(rng);
  }
  act.probs = act.probs.cwiseMax(0.0).cwiseMin(1.0);
  act.source_tag = "oracle";
  return act;
}

}  // namespace farfield::simulate
