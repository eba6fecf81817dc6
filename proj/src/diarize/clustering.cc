#include "farfield/diarize/clustering.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "farfield/core/errors.h"

namespace farfield::diarize {
namespace {

constexpr double kVarianceFloor = 1e-6;

// k-means++ seeding; stops early when every remaining point coincides with
// a chosen center.
std::vector<Eigen::Index> SeedCenters(const Eigen::MatrixXd& points, int k,
                                      std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  std::vector<Eigen::Index> centers;
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.push_back(first(rng));
  Eigen::VectorXd dist2 =
      (points.rowwise() - points.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    const double total = dist2.sum();
    if (total <= 0.0) break;
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      r -= dist2(i);
      if (r < 0.0 && dist2(i) > 0.0) {
        pick = i;
        break;
      }
    }
    if (dist2(pick) <= 0.0) break;
    centers.push_back(pick);
    dist2 = dist2.cwiseMin(
        (points.rowwise() - points.row(pick)).rowwise().squaredNorm());
  }
  return centers;
}

// Lloyd iterations refining the seeded means; returns labels.
std::vector<int> Lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd& means,
                       int iterations) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = means.rows();
  std::vector<int> labels(n, 0);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (means.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (labels[i] != best) changed = true;
      labels[i] = static_cast<int>(best);
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[i]) += points.row(i);
      counts(labels[i]) += 1.0;
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts(c) > 0.0) means.row(c) = sums.row(c) / counts(c);
    }
    if (!changed && it > 0) break;
  }
  return labels;
}

// Per-point log of weighted component densities (n x k).
Eigen::MatrixXd LogJoint(const Eigen::MatrixXd& points, const GmmFit& g) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = g.means.rows();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  Eigen::MatrixXd out(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::RowVectorXd inv = g.variances.row(c).cwiseInverse();
    const double norm = std::log(g.weights(c)) -
                        0.5 * (g.variances.row(c).array().log().sum() +
                               static_cast<double>(points.cols()) * log2pi);
    const Eigen::MatrixXd diff = points.rowwise() - g.means.row(c);
    out.col(c) = (norm - 0.5 * (diff.array().square().rowwise() *
                                inv.array()).rowwise().sum())
                     .matrix();
  }
  return out;
}

}  // namespace

void DiarizeConfig::Validate() const {
  if (max_clusters < 1) throw ConfigError("max_clusters must be >= 1");
  if (reduced_dim < 1) throw ConfigError("reduced_dim must be >= 1");
  if (!(merge_cos_threshold > -1.0 && merge_cos_threshold < 1.0)) {
    throw ConfigError("merge_cos_threshold must be in (-1, 1)");
  }
  if (!(reject_thr > 0.0)) throw ConfigError("reject_thr must be positive");
  if (!(frame_step > 0.0)) throw ConfigError("frame_step must be positive");
}

int ClusterSet::MaxSize() const {
  int m = 0;
  for (const auto& c : clusters) {
    if (!c.rejected) m = std::max(m, c.size);
  }
  return m;
}

std::vector<int> ClusterSet::SurvivingIds() const {
  std::vector<int> ids;
  for (const auto& c : clusters) {
    if (!c.rejected) ids.push_back(c.id);
  }
  return ids;
}

int ClusterSet::NumSurviving() const {
  return static_cast<int>(SurvivingIds().size());
}

const Cluster& ClusterSet::Get(int id) const {
  for (const auto& c : clusters) {
    if (c.id == id) return c;
  }
  throw std::out_of_range("no cluster with id " + std::to_string(id));
}

Cluster& ClusterSet::Get(int id) {
  return const_cast<Cluster&>(std::as_const(*this).Get(id));
}

GmmFit FitDiagonalGmm(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                      int max_iterations, double tolerance) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  if (n == 0 || k < 1) throw DataError("gmm: no points or no components");
  std::mt19937_64 rng(seed);
  const std::vector<Eigen::Index> seeds = SeedCenters(points, k, rng);
  const auto comps = static_cast<Eigen::Index>(seeds.size());

  GmmFit g;
  g.means.resize(comps, dim);
  for (Eigen::Index c = 0; c < comps; ++c) g.means.row(c) = points.row(seeds[c]);
  std::vector<int> labels = Lloyd(points, g.means, 20);

  g.variances = Eigen::MatrixXd::Constant(comps, dim, kVarianceFloor);
  g.weights = Eigen::VectorXd::Zero(comps);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = labels[i];
    g.variances.row(c) +=
        (points.row(i) - g.means.row(c)).array().square().matrix();
    g.weights(c) += 1.0;
  }
  for (Eigen::Index c = 0; c < comps; ++c) {
    if (g.weights(c) > 0.0) g.variances.row(c) /= g.weights(c) + 1.0;
  }
  g.weights = (g.weights.array() + 1e-3).matrix();
  g.weights /= g.weights.sum();

  Eigen::MatrixXd resp;
  for (int it = 0; it <= max_iterations; ++it) {
    // E-step under the current parameters.
    const Eigen::MatrixXd joint = LogJoint(points, g);
    const Eigen::VectorXd peak = joint.rowwise().maxCoeff();
    const Eigen::VectorXd lse =
        peak + (joint.colwise() - peak).array().exp().rowwise().sum().log().matrix();
    resp = (joint.colwise() - lse).array().exp().matrix();
    g.log_likelihood.push_back(lse.mean());
    const auto m = g.log_likelihood.size();
    if (m >= 2 && std::abs(g.log_likelihood[m - 1] - g.log_likelihood[m - 2]) <=
                      tolerance * std::abs(g.log_likelihood[m - 2])) {
      break;
    }
    if (it == max_iterations) break;

    // M-step; components with no responsibility are removed.
    const Eigen::VectorXd mass = resp.colwise().sum().transpose();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < mass.size(); ++c) {
      if (mass(c) > 1e-8) keep.push_back(c);
    }
    GmmFit next;
    const auto kk = static_cast<Eigen::Index>(keep.size());
    next.means.resize(kk, dim);
    next.variances.resize(kk, dim);
    next.weights.resize(kk);
    for (Eigen::Index j = 0; j < kk; ++j) {
      const Eigen::Index c = keep[j];
      const Eigen::VectorXd r = resp.col(c);
      const Eigen::RowVectorXd mean = (r.transpose() * points) / mass(c);
      const Eigen::MatrixXd diff = points.rowwise() - mean;
      next.means.row(j) = mean;
      next.variances.row(j) =
          ((r.transpose() * diff.array().square().matrix()) / mass(c))
              .cwiseMax(kVarianceFloor);
      next.weights(j) = mass(c) / static_cast<double>(n);
    }
    next.log_likelihood = std::move(g.log_likelihood);
    g = std::move(next);
  }

  g.labels.assign(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    resp.row(i).maxCoeff(&best);
    g.labels[i] = static_cast<int>(best);
  }
  return g;
}

void RecomputeCentroids(ClusterSet& clusters, const Eigen::MatrixXd& vectors) {
  for (auto& c : clusters.clusters) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(vectors.cols());
    for (std::size_t i = 0; i < clusters.assignments.size(); ++i) {
      if (clusters.assignments[i] == c.id) {
        sum += vectors.row(static_cast<Eigen::Index>(i)).transpose();
      }
    }
    const double norm = sum.norm();
    c.centroid = norm > 0.0 ? Eigen::VectorXd(sum / norm) : sum;
  }
}

ClusterSet GmmCluster(const Eigen::MatrixXd& points, const DiarizeConfig& cfg,
                      std::uint64_t seed) {
  cfg.Validate();
  if (points.rows() < cfg.max_clusters) {
    throw DataError("gmm_cluster: need at least max_clusters = " +
                    std::to_string(cfg.max_clusters) + " points, got " +
                    std::to_string(points.rows()));
  }
  const GmmFit fit = FitDiagonalGmm(points, cfg.max_clusters, seed,
                                    cfg.max_em_iterations, cfg.em_tolerance);
  // Renumber non-empty components consecutively.
  std::vector<int> remap(fit.means.rows(), kUnassigned);
  std::vector<int> sizes;
  ClusterSet out;
  out.assignments.resize(fit.labels.size());
  for (std::size_t i = 0; i < fit.labels.size(); ++i) {
    int& id = remap[fit.labels[i]];
    if (id == kUnassigned) {
      id = static_cast<int>(sizes.size());
      sizes.push_back(0);
    }
    ++sizes[id];
    out.assignments[i] = id;
  }
  for (int id = 0; id < static_cast<int>(sizes.size()); ++id) {
    out.clusters.push_back({id, Eigen::VectorXd(), sizes[id], false});
  }
  RecomputeCentroids(out, points);
  return out;
}

ClusterSet MergeRejectClusters(ClusterSet clusters, const DiarizeConfig& cfg) {
  auto& list = clusters.clusters;
  while (true) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].rejected) continue;
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        if (list[j].rejected) continue;
        const double na = list[i].centroid.norm();
        const double nb = list[j].centroid.norm();
        const double cos = (na > 0.0 && nb > 0.0)
                               ? list[i].centroid.dot(list[j].centroid) / (na * nb)
                               : 0.0;
        if (cos > best) {
          best = cos;
          bi = i;
          bj = j;
        }
      }
    }
    if (!(best > cfg.merge_cos_threshold)) break;
    Cluster& keep = list[bi];
    const Cluster& gone = list[bj];
    Eigen::VectorXd merged = keep.size * keep.centroid.normalized() +
                             gone.size * gone.centroid.normalized();
    const double norm = merged.norm();
    keep.centroid = norm > 0.0 ? Eigen::VectorXd(merged / norm) : merged;
    keep.size += gone.size;
    for (int& a : clusters.assignments) {
      if (a == gone.id) a = keep.id;
    }
    list.erase(list.begin() + static_cast<long>(bj));
  }

  const double limit = clusters.MaxSize() / cfg.reject_thr;
  for (auto& c : list) {
    if (!c.rejected && c.size < limit) c.rejected = true;
  }
  for (int& a : clusters.assignments) {
    if (a != kUnassigned && clusters.Get(a).rejected) a = kUnassigned;
  }
  return clusters;
}

void RejectClusters(ClusterSet& clusters,
                    const std::function<bool(const Cluster&)>& is_nonspeech) {
  if (!is_nonspeech) return;
  for (auto& c : clusters.clusters) {
    if (!c.rejected && is_nonspeech(c)) c.rejected = true;
  }
  for (int& a : clusters.assignments) {
    if (a != kUnassigned && clusters.Get(a).rejected) a = kUnassigned;
  }
}

int CountSpeakers(const ClusterSet& clusters) { return clusters.NumSurviving(); }

}  // namespace farfield::diarize
