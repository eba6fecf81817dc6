#include "farfield/diarize/reduce.h"

#include <string>

#include "farfield/core/errors.h"
#include "farfield/core/logging.h"

namespace farfield::diarize {

Eigen::MatrixXd ReduceDim(const Eigen::MatrixXd& vectors, int target_dim,
                          Reduction method) {
  const Eigen::Index n = vectors.rows();
  const Eigen::Index dim = vectors.cols();
  if (target_dim < 1 || target_dim > dim) {
    throw DataError("reduce_dim: target dimension " +
                    std::to_string(target_dim) + " not in [1, " +
                    std::to_string(dim) + "]");
  }
  if (method == Reduction::kExternal) {
    if (target_dim != dim) {
      throw DataError("reduce_dim: externally reduced vectors have dimension " +
                      std::to_string(dim) + ", expected " +
                      std::to_string(target_dim));
    }
    return vectors;
  }
  if (n < target_dim + 1) {
    throw DataError("reduce_dim: need at least " +
                    std::to_string(target_dim + 1) + " samples, got " +
                    std::to_string(n));
  }
  const Eigen::RowVectorXd mean = vectors.colwise().mean();
  const Eigen::MatrixXd centered = vectors.rowwise() - mean;
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("reduce_dim: eigendecomposition failed");
  }
  // Eigenvalues ascend; take the trailing columns in reverse.
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = std::max(values(dim - 1), 0.0);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(dim, target_dim);
  int kept = 0;
  for (int k = 0; k < target_dim; ++k) {
    const Eigen::Index src = dim - 1 - k;
    if (top > 0.0 && values(src) > 1e-12 * top) {
      basis.col(k) = eig.eigenvectors().col(src);
      ++kept;
    }
  }
  if (kept < target_dim) {
    Logger()->warn("reduce_dim: only {} of {} principal directions carry "
                   "variance; padding with zeros", kept, target_dim);
  }
  return centered * basis;
}

}  // namespace farfield::diarize
