#include "farfield/metrics/si_sdr.h"

#include <algorithm>
#include <cmath>

#include "farfield/core/errors.h"

namespace farfield::metrics {

double SiSdr(std::span<const double> estimate,
             std::span<const double> reference) {
  if (estimate.size() != reference.size()) {
    throw DataError("si_sdr: length mismatch");
  }
  double ref_energy = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    ref_energy += reference[i] * reference[i];
    dot += estimate[i] * reference[i];
  }
  if (ref_energy <= 0.0) throw DataError("si_sdr: zero reference");
  const double alpha = dot / ref_energy;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = alpha * reference[i];
    const double e = estimate[i] - t;
    target += t * t;
    residual += e * e;
  }
  if (residual <= 0.0) return kSiSdrCapDb;
  if (target <= 0.0) return -kSiSdrCapDb;
  return std::min(kSiSdrCapDb, 10.0 * std::log10(target / residual));
}

}  // namespace farfield::metrics
