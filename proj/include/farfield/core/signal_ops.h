#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace farfield {

// Full linear convolution (length a + b - 1) computed with FFTs.
Eigen::VectorXd FftConvolve(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

double Energy(std::span<const double> x);

// Nearest-rank quantile of |x|: the smallest value v such that at least
// `q * x.size()` magnitudes are <= v.
double AbsQuantile(std::span<const double> x, double q);

}  // namespace farfield
