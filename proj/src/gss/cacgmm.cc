#include "farfield/gss/cacgmm.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "farfield/core/errors.h"

namespace farfield::gss {
namespace {

constexpr double kQuadFloor = 1e-10;

struct Factor {
  Eigen::LLT<Eigen::MatrixXcd> llt;
  double log_det = 0.0;
};

Factor Factorize(Eigen::MatrixXcd& shape) {
  const auto d = static_cast<double>(shape.rows());
  Factor f;
  f.llt.compute(shape);
  double load = 1e-10;
  while (f.llt.info() != Eigen::Success) {
    // Loss of definiteness from rank-deficient statistics: load the diagonal.
    shape.diagonal().array() += load * d;
    shape *= d / shape.trace().real();
    f.llt.compute(shape);
    load *= 10.0;
    if (load > 1.0) throw NumericalError("cACGMM shape matrix is not PD");
  }
  f.log_det = 2.0 * f.llt.matrixL().toDenseMatrix().diagonal().real().array().log().sum();
  return f;
}

// z^H B^-1 z for every column of z.
Eigen::RowVectorXd Quadratic(const Factor& f, const Eigen::MatrixXcd& z) {
  const Eigen::MatrixXcd y = f.llt.matrixL().solve(z);
  return y.colwise().squaredNorm().cwiseMax(kQuadFloor);
}

// Hermitian shape with eigenvalues at least kEigenFloor times the largest,
// scaled to trace d.
Eigen::MatrixXcd FloorEigenvalues(const Eigen::MatrixXcd& shape) {
  constexpr double kEigenFloor = 1e-10;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(shape);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double floor = kEigenFloor * ev.maxCoeff();
  Eigen::MatrixXcd out = shape;
  if (ev.minCoeff() < floor) {
    out = es.eigenvectors() * ev.cwiseMax(floor).asDiagonal() * es.eigenvectors().adjoint();
    out = 0.5 * (out + out.adjoint()).eval();
  }
  return out * (static_cast<double>(shape.rows()) / out.trace().real());
}

double LogNormalizer(int d) {
  return std::lgamma(static_cast<double>(d)) - std::log(2.0) -
         d * std::log(std::numbers::pi);
}

}  // namespace

void GssConfig::Validate() const {
  if (iterations < 1) throw ConfigError("GSS iterations must be >= 1");
  if (chunk_frames && *chunk_frames < 2) {
    throw ConfigError("GSS chunk_frames must be >= 2");
  }
  if (context_margin < 0.0) throw ConfigError("GSS context margin must be >= 0");
  if (!(noise_floor >= 0.0 && noise_floor <= 1.0)) {
    throw ConfigError("GSS noise floor must be in [0, 1]");
  }
  stft.Validate();
  if (wpe_enabled) wpe.Validate();
}

Eigen::MatrixXd BuildPriors(const fusion::SoftActivity& activities,
                            const SpectralTensor& tensor, double start_time,
                            bool add_noise_source, double noise_floor) {
  const int speakers = activities.speakers();
  const int sources = speakers + (add_noise_source ? 1 : 0);
  if (sources == 0) throw DataError("GSS needs at least one source");
  Eigen::MatrixXd priors(sources, tensor.frames());
  for (int t = 0; t < tensor.frames(); ++t) {
    const double time =
        start_time + tensor.params.FrameCenterSeconds(t, tensor.sample_rate);
    const int k = activities.FrameAt(time);
    double sum = 0.0;
    for (int s = 0; s < speakers; ++s) {
      priors(s, t) = activities.frames() > 0 ? activities.probs(s, k) : 0.0;
      sum += priors(s, t);
    }
    if (add_noise_source) {
      priors(speakers, t) = std::max(1.0 - sum, noise_floor);
      sum += priors(speakers, t);
    }
    if (sum > 0.0) {
      priors.col(t) /= sum;
    } else {
      priors.col(t).setConstant(1.0 / sources);
    }
  }
  return priors;
}

double CacgLogDensity(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& shape) {
  Eigen::MatrixXcd b = shape;
  const Factor f = Factorize(b);
  const int d = static_cast<int>(z.size());
  const double q = std::max(Quadratic(f, z)(0), kQuadFloor);
  return LogNormalizer(d) - f.log_det - d * std::log(q);
}

CacgmmResult CacgmmBin(const Eigen::MatrixXcd& observation,
                       const Eigen::MatrixXd& priors, int iterations,
                       bool reestimate_priors) {
  const int d = static_cast<int>(observation.rows());
  const int frames = static_cast<int>(observation.cols());
  const int sources = static_cast<int>(priors.rows());
  if (d < 2) throw DataError("cACGMM needs at least two channels");
  if (priors.cols() != frames) throw DataError("cACGMM priors misaligned");

  // Direction-normalized observations; silent frames are left out of the
  // statistics and keep their prior as posterior.
  std::vector<int> active;
  for (int t = 0; t < frames; ++t) {
    if (observation.col(t).squaredNorm() > 0.0) active.push_back(t);
  }
  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXcd z(d, n);
  Eigen::MatrixXd pi(sources, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z.col(i) = observation.col(active[i]).normalized();
    pi.col(i) = priors.col(active[i]);
  }
  const Eigen::MatrixXd guide = pi;

  CacgmmResult result;
  std::vector<Eigen::MatrixXcd> shapes(sources, Eigen::MatrixXcd::Identity(d, d));
  Eigen::MatrixXd gamma = pi;  // posterior under identity shapes
  std::vector<double> ll;
  const double norm = LogNormalizer(d);
  ll.push_back(n > 0 ? norm : 0.0);  // identity shapes: q = 1, log det = 0

  Eigen::MatrixXd log_joint(sources, n);
  for (int it = 0; it < iterations && n > 0; ++it) {
    for (int s = 0; s < sources; ++s) {
      const double mass = gamma.row(s).sum();
      if (mass <= 0.0) continue;
      Eigen::MatrixXcd current = shapes[s];
      const Factor f = Factorize(current);
      const Eigen::RowVectorXd q = Quadratic(f, z);
      const Eigen::RowVectorXd w = gamma.row(s).cwiseQuotient(q);
      Eigen::MatrixXcd b = static_cast<double>(d) *
                           (z * w.transpose().asDiagonal() * z.adjoint()) / mass;
      b = FloorEigenvalues(0.5 * (b + b.adjoint()).eval());
      // The update maximizes the minorizer -mass log det B - d sum w q(B),
      // which equals -mass (log det B_old + d) at B_old. When the weighted
      // data span too few directions the maximizer is singular; the floored
      // shape is kept only if it still does not lower the minorizer.
      const Factor g = Factorize(b);
      const double gain = -mass * g.log_det - d * w.dot(Quadratic(g, z));
      const double base = -mass * (f.log_det + d);
      if (gain >= base - 1e-12 * std::max(1.0, std::abs(base))) shapes[s] = b;
    }
    for (int s = 0; s < sources; ++s) {
      const Factor f = Factorize(shapes[s]);
      const Eigen::RowVectorXd q = Quadratic(f, z);
      log_joint.row(s) =
          (norm - f.log_det - d * q.array().log()).matrix() +
          pi.row(s).array().log().matrix();
    }
    const Eigen::RowVectorXd peak = log_joint.colwise().maxCoeff();
    const Eigen::RowVectorXd lse =
        peak + (log_joint.rowwise() - peak).array().exp().colwise().sum().log().matrix();
    gamma = (log_joint.rowwise() - lse).array().exp().matrix();
    ll.push_back(lse.mean());
    if (reestimate_priors) {
      const Eigen::VectorXd weight = gamma.rowwise().mean();
      pi = weight.asDiagonal() * guide;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double sum = pi.col(i).sum();
        pi.col(i) = sum > 0.0 ? Eigen::VectorXd(pi.col(i) / sum) : guide.col(i);
      }
    }
  }

  Eigen::MatrixXd masks = priors;
  for (Eigen::Index i = 0; i < n; ++i) masks.col(active[i]) = gamma.col(i);
  result.masks.bins.push_back(std::move(masks));
  result.state.shape_matrices.push_back(std::move(shapes));
  result.state.priors = priors;
  result.log_likelihood.push_back(std::move(ll));
  return result;
}

CacgmmResult CacgmmEm(const SpectralTensor& tensor,
                      const fusion::SoftActivity& activities,
                      const GssConfig& cfg, double start_time) {
  cfg.Validate();
  if (tensor.channels() < 2) throw DataError("cACGMM needs at least two channels");
  const Eigen::MatrixXd priors = BuildPriors(
      activities, tensor, start_time, cfg.add_noise_source, cfg.noise_floor);
  CacgmmResult out;
  out.state.priors = priors;
  out.masks.bins.reserve(tensor.bins());
  for (int f = 0; f < tensor.bins(); ++f) {
    CacgmmResult bin =
        CacgmmBin(tensor.Bin(f), priors, cfg.iterations, cfg.reestimate_priors);
    out.masks.bins.push_back(std::move(bin.masks.bins.front()));
    out.state.shape_matrices.push_back(std::move(bin.state.shape_matrices.front()));
    out.log_likelihood.push_back(std::move(bin.log_likelihood.front()));
  }
  return out;
}

std::vector<std::pair<int, int>> ChunkBounds(int frames, int chunk_frames) {
  std::vector<std::pair<int, int>> out;
  for (int start = 0; start < frames; start += chunk_frames) {
    const int end = std::min(start + chunk_frames, frames);
    if (!out.empty() && end - start < 2) {
      out.back().second = end;
    } else {
      out.emplace_back(start, end);
    }
  }
  return out;
}

CacgmmResult ChunkedCacgmm(const SpectralTensor& tensor,
                           const fusion::SoftActivity& activities,
                           const GssConfig& cfg, double start_time) {
  cfg.Validate();
  if (!cfg.chunk_frames || tensor.frames() <= *cfg.chunk_frames) {
    return CacgmmEm(tensor, activities, cfg, start_time);
  }
  const double shift_seconds =
      static_cast<double>(tensor.params.frame_shift) / tensor.sample_rate;
  CacgmmResult out;
  bool first = true;
  for (const auto& [begin, end] : ChunkBounds(tensor.frames(), *cfg.chunk_frames)) {
    const SpectralTensor chunk = tensor.Frames(begin, end);
    CacgmmResult part =
        CacgmmEm(chunk, activities, cfg, start_time + begin * shift_seconds);
    if (first) {
      out = std::move(part);
      first = false;
      continue;
    }
    for (int f = 0; f < tensor.bins(); ++f) {
      Eigen::MatrixXd& m = out.masks.bins[f];
      Eigen::MatrixXd joined(m.rows(), m.cols() + part.masks.bins[f].cols());
      joined << m, part.masks.bins[f];
      m = std::move(joined);
      out.log_likelihood.push_back(std::move(part.log_likelihood[f]));
    }
    Eigen::MatrixXd priors(out.state.priors.rows(),
                           out.state.priors.cols() + part.state.priors.cols());
    priors << out.state.priors, part.state.priors;
    out.state.priors = std::move(priors);
  }
  return out;
}

fusion::SoftActivity ApplyVadMask(const fusion::SoftActivity& activities,
                                  const Eigen::MatrixXd& vad) {
  if (vad.rows() != activities.probs.rows() ||
      vad.cols() != activities.probs.cols()) {
    throw DataError("VAD mask shape does not match the activities");
  }
  fusion::SoftActivity out = activities;
  out.probs = activities.probs.cwiseProduct(vad);
  return out;
}

}  // namespace farfield::gss
