#pragma once

#include <Eigen/Dense>

namespace farfield::diarize {

enum class Reduction {
  kLinear,    // PCA projection
  kExternal,  // vectors were reduced upstream; passed through
};

// Rows are samples. `kLinear` centers the data and projects it onto the top
// `target_dim` principal directions; directions with no variance are
// returned as zero columns.
Eigen::MatrixXd ReduceDim(const Eigen::MatrixXd& vectors, int target_dim,
                          Reduction method);

}  // namespace farfield::diarize
