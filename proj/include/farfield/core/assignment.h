#pragma once

#include <vector>

#include <Eigen/Dense>

namespace farfield {

// Maximum-weight bipartite assignment (Hungarian algorithm) on a rectangular
// gain matrix. Returns, for each row, the assigned column, or -1 when the row
// is left unmatched because there are more rows than columns.
std::vector<int> MaxWeightAssignment(const Eigen::MatrixXd& gain);

}  // namespace farfield
