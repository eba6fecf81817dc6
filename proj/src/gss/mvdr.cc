#include "farfield/gss/mvdr.h"

#include <cmath>
#include <string>

#include "farfield/core/errors.h"

namespace farfield::gss {
namespace {

// Phi_n^-1 Phi_t normalized by its trace; zero when the target is empty.
Eigen::MatrixXcd SoudenMatrix(const Eigen::MatrixXcd& target_cov,
                              const Eigen::MatrixXcd& noise_cov) {
  const Eigen::Index d = noise_cov.rows();
  const double target_trace = target_cov.trace().real();
  if (target_trace <= 0.0) return Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd loaded = noise_cov;
  const double trace = noise_cov.trace().real();
  // Without any noise statistics the noise field is taken as spatially white.
  loaded.diagonal().array() +=
      1e-8 * (trace > 0.0 ? trace : target_trace) / static_cast<double>(d);
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(loaded);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("MVDR noise covariance is singular");
  }
  const Eigen::MatrixXcd m = ldlt.solve(target_cov);
  const std::complex<double> tr = m.trace();
  if (std::abs(tr) <= 1e-300 || !m.allFinite()) return Eigen::MatrixXcd::Zero(d, d);
  return m / tr;
}

}  // namespace

Eigen::MatrixXcd MaskedCovariance(const Eigen::MatrixXcd& observation,
                                  const Eigen::RowVectorXd& mask) {
  const double mass = mask.sum();
  if (mass <= 0.0) {
    return Eigen::MatrixXcd::Zero(observation.rows(), observation.rows());
  }
  return observation * mask.transpose().asDiagonal() * observation.adjoint() / mass;
}

Eigen::VectorXcd SoudenMvdrWeights(const Eigen::MatrixXcd& target_cov,
                                   const Eigen::MatrixXcd& noise_cov,
                                   int reference) {
  return SoudenMatrix(target_cov, noise_cov).col(reference);
}

BeamformResult MvdrBeamform(const SpectralTensor& tensor, const MaskTensor& masks,
                            int target, std::optional<int> reference) {
  const int d = tensor.channels();
  if (target < 0 || target >= masks.sources()) {
    throw DataError("MVDR target source " + std::to_string(target) +
                    " out of range");
  }
  if (masks.num_bins() != tensor.bins() || masks.frames() != tensor.frames()) {
    throw DataError("MVDR masks are not aligned with the spectrum");
  }
  if (reference && (*reference < 0 || *reference >= d)) {
    throw DataError("MVDR reference channel out of range");
  }

  std::vector<Eigen::MatrixXcd> souden(tensor.bins());
  std::vector<Eigen::MatrixXcd> target_cov(tensor.bins()), noise_cov(tensor.bins());
  for (int f = 0; f < tensor.bins(); ++f) {
    const Eigen::RowVectorXd m = masks.bins[f].row(target);
    const Eigen::RowVectorXd rest = (1.0 - m.array()).matrix();
    target_cov[f] = MaskedCovariance(tensor.Bin(f), m);
    noise_cov[f] = MaskedCovariance(tensor.Bin(f), rest);
    souden[f] = SoudenMatrix(target_cov[f], noise_cov[f]);
  }

  int ref = reference.value_or(0);
  if (!reference) {
    double best = -1.0;
    for (int r = 0; r < d; ++r) {
      double num = 0.0, den = 0.0;
      for (int f = 0; f < tensor.bins(); ++f) {
        const Eigen::VectorXcd w = souden[f].col(r);
        num += (w.adjoint() * target_cov[f] * w)(0).real();
        den += (w.adjoint() * noise_cov[f] * w)(0).real();
      }
      const double snr = den > 0.0 ? num / den : 0.0;
      if (snr > best) {
        best = snr;
        ref = r;
      }
    }
  }

  BeamformResult result;
  result.reference_channel = ref;
  result.output = SpectralTensor(1, tensor.frames(), tensor.bins());
  result.output.params = tensor.params;
  result.output.sample_rate = tensor.sample_rate;
  result.output.num_samples = tensor.num_samples;
  for (int f = 0; f < tensor.bins(); ++f) {
    const Eigen::VectorXcd w = souden[f].col(ref);
    result.output.Bin(f) = w.adjoint() * tensor.Bin(f);
  }
  return result;
}

}  // namespace farfield::gss
