#pragma once

#include <optional>

#include <Eigen/Dense>

#include "farfield/core/stft.h"
#include "farfield/gss/cacgmm.h"

namespace farfield::gss {

// Mask-weighted spatial covariance sum_t m_t x_t x_t^H / sum_t m_t.
Eigen::MatrixXcd MaskedCovariance(const Eigen::MatrixXcd& observation,
                                  const Eigen::RowVectorXd& mask);

// Rank-1 (Souden) MVDR weights for reference channel `reference`:
// (Phi_n^-1 Phi_t / tr(Phi_n^-1 Phi_t)) e_ref. Phi_n is loaded with
// 1e-8 * tr(Phi_n) / D (tr(Phi_t) when Phi_n vanishes). Returns zeros when
// the target covariance is empty.
Eigen::VectorXcd SoudenMvdrWeights(const Eigen::MatrixXcd& target_cov,
                                   const Eigen::MatrixXcd& noise_cov,
                                   int reference);

struct BeamformResult {
  SpectralTensor output;  // single channel
  int reference_channel = 0;
};

// Beamforms source `target` of `masks`. Without an explicit reference the
// channel with the highest expected output SNR (summed over bins) is used.
BeamformResult MvdrBeamform(const SpectralTensor& tensor, const MaskTensor& masks,
                            int target, std::optional<int> reference = {});

}  // namespace farfield::gss
