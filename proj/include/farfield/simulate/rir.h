#pragma once

#include <optional>

#include <Eigen/Dense>

#include "farfield/simulate/room.h"

namespace farfield::simulate {

struct Rir {
  Eigen::VectorXd taps;
  int sample_rate = 16000;
  int direct_path_delay = 0;  // samples
};

struct RirOptions {
  int sample_rate = 16000;
  std::optional<int> max_order;  // unset: AutoReflectionOrder
  std::optional<int> length;     // unset: ceil(t60 * fs), at least the direct path
  bool high_pass = true;         // 100 Hz DC-removal filter
};

// ceil(c * t60 / smallest dimension) + 1.
int AutoReflectionOrder(const RoomSpec& room);

// Image-source room impulse response from `source` to `receiver`. Every image
// is placed with an 81-tap Hann-windowed sinc and scaled by 1/(4 pi d).
Rir GenerateRir(const RoomSpec& room, int source, int receiver,
                const RirOptions& opts = {});

// Reverberation time from the Schroeder backward integral, fitting the decay
// between -5 dB and -5 - `range_db`.
double SchroederT60(const Eigen::VectorXd& taps, int sample_rate,
                    double range_db = 20.0);

}  // namespace farfield::simulate
