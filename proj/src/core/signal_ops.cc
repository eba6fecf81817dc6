#include "farfield/core/signal_ops.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include <unsupported/Eigen/FFT>

namespace farfield {

Eigen::VectorXd FftConvolve(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0 || b.size() == 0) return {};
  const Eigen::Index out_len = a.size() + b.size() - 1;
  Eigen::Index nfft = 1;
  while (nfft < out_len) nfft <<= 1;
  std::vector<double> pa(nfft, 0.0), pb(nfft, 0.0);
  std::copy(a.data(), a.data() + a.size(), pa.begin());
  std::copy(b.data(), b.data() + b.size(), pb.begin());
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, pa);
  fft.fwd(fb, pb);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  std::vector<double> out;
  fft.inv(out, fa, nfft);
  return Eigen::Map<Eigen::VectorXd>(out.data(), out_len);
}

double Energy(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double AbsQuantile(std::span<const double> x, double q) {
  if (x.empty()) return 0.0;
  std::vector<double> mags(x.size());
  std::transform(x.begin(), x.end(), mags.begin(),
                 [](double v) { return std::abs(v); });
  const auto n = static_cast<double>(mags.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, mags.size());
  std::nth_element(mags.begin(), mags.begin() + (rank - 1), mags.end());
  return mags[rank - 1];
}

}  // namespace farfield
