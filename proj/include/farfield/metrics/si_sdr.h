#pragma once

#include <span>

namespace farfield::metrics {

inline constexpr double kSiSdrCapDb = 60.0;

// Scale-invariant SDR in dB, capped at kSiSdrCapDb.
double SiSdr(std::span<const double> estimate, std::span<const double> reference);

}  // namespace farfield::metrics
