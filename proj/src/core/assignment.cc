#include "farfield/core/assignment.h"

#include <limits>

namespace farfield {
namespace {

// Shortest augmenting path with potentials; rows <= cols, minimizes cost.
std::vector<int> MinCostRowsToCols(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<int> MaxWeightAssignment(const Eigen::MatrixXd& gain) {
  const Eigen::Index rows = gain.rows();
  const Eigen::Index cols = gain.cols();
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  if (rows <= cols) return MinCostRowsToCols(-gain);
  const std::vector<int> col_to_row = MinCostRowsToCols(-gain.transpose());
  std::vector<int> row_to_col(rows, -1);
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (col_to_row[j] >= 0) row_to_col[col_to_row[j]] = static_cast<int>(j);
  }
  return row_to_col;
}

}  // namespace farfield
