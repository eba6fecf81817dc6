#include "farfield/simulate/rir.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "farfield/core/errors.h"

namespace farfield::simulate {
namespace {

constexpr int kHalfTaps = 40;  // 81-tap interpolator

void AddImpulse(Eigen::VectorXd& taps, double delay, double gain) {
  const auto base = static_cast<long>(std::floor(delay));
  const double frac = delay - static_cast<double>(base);
  for (int n = -kHalfTaps; n <= kHalfTaps; ++n) {
    const long idx = base + n;
    if (idx < 0 || idx >= taps.size()) continue;
    const double t = static_cast<double>(n) - frac;
    const double window =
        0.5 * (1.0 + std::cos(std::numbers::pi * t / (kHalfTaps + 1)));
    const double sinc =
        std::abs(t) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
    taps[idx] += gain * window * sinc;
  }
}

// Second-order high-pass at 100 Hz (Allen and Berkley). All image gains are
// positive, so without it the late pulses pile up coherently at DC.
void HighPass(Eigen::VectorXd& taps, double sample_rate) {
  const double w = 2.0 * std::numbers::pi * 100.0 / sample_rate;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w);
  const double b2 = -r1 * r1;
  const double a1 = -(1.0 + r1);
  double y0 = 0.0, y1 = 0.0, y2 = 0.0;
  for (auto& x : taps) {
    y2 = y1;
    y1 = y0;
    y0 = b1 * y1 + b2 * y2 + x;
    x = y0 + a1 * y1 + r1 * y2;
  }
}

}  // namespace

int AutoReflectionOrder(const RoomSpec& room) {
  return static_cast<int>(
             std::ceil(room.speed_of_sound * room.t60 / room.dimensions.minCoeff())) +
         1;
}

Rir GenerateRir(const RoomSpec& room, int source, int receiver,
                const RirOptions& opts) {
  room.Validate();
  if (source < 0 || source >= static_cast<int>(room.sources.size())) {
    throw ConfigError("source index " + std::to_string(source) + " out of range");
  }
  if (receiver < 0 || receiver >= static_cast<int>(room.receivers.size())) {
    throw ConfigError("receiver index " + std::to_string(receiver) + " out of range");
  }
  if (opts.sample_rate <= 0) throw ConfigError("sample rate must be positive");

  const Eigen::Vector3d& s = room.sources[source];
  const Eigen::Vector3d& r = room.receivers[receiver];
  const double fs = opts.sample_rate;
  const double c = room.speed_of_sound;
  const double direct = (s - r).norm() / c * fs;

  Rir rir;
  rir.sample_rate = opts.sample_rate;
  rir.direct_path_delay = static_cast<int>(std::lround(direct));
  const int length = opts.length.value_or(std::max(
      static_cast<int>(std::ceil(room.t60 * fs)),
      rir.direct_path_delay + kHalfTaps + 1));
  if (length <= 0) throw ConfigError("RIR length must be positive");
  rir.taps = Eigen::VectorXd::Zero(length);

  const int order = opts.max_order.value_or(AutoReflectionOrder(room));
  const double beta = room.ReflectionCoefficient();
  const double max_delay = length + kHalfTaps;
  const double max_dist = max_delay / fs * c;
  const Eigen::Vector3d& dims = room.dimensions;
  Eigen::Array3i bound;
  for (int i = 0; i < 3; ++i) {
    bound[i] = std::min(order, static_cast<int>(std::ceil(max_dist / (2.0 * dims[i]))) + 1);
  }

  for (int mx = -bound[0]; mx <= bound[0]; ++mx) {
    for (int my = -bound[1]; my <= bound[1]; ++my) {
      for (int mz = -bound[2]; mz <= bound[2]; ++mz) {
        const Eigen::Vector3d cell(2.0 * mx * dims.x(), 2.0 * my * dims.y(),
                                   2.0 * mz * dims.z());
        for (int q = 0; q < 2; ++q) {
          for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
              const int reflections = std::abs(mx - q) + std::abs(mx) +
                                      std::abs(my - j) + std::abs(my) +
                                      std::abs(mz - k) + std::abs(mz);
              if (reflections > order) continue;
              const Eigen::Vector3d image(
                  (1 - 2 * q) * s.x(), (1 - 2 * j) * s.y(), (1 - 2 * k) * s.z());
              const double dist = (cell + image - r).norm();
              const double delay = dist / c * fs;
              if (delay >= max_delay) continue;
              const double gain = std::pow(beta, reflections) /
                                  (4.0 * std::numbers::pi * std::max(dist, 1e-6));
              if (gain == 0.0) continue;
              AddImpulse(rir.taps, delay, gain);
            }
          }
        }
      }
    }
  }
  if (opts.high_pass) HighPass(rir.taps, fs);
  return rir;
}

double SchroederT60(const Eigen::VectorXd& taps, int sample_rate, double range_db) {
  const Eigen::Index n = taps.size();
  Eigen::VectorXd edc(n);
  double acc = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    acc += taps[i] * taps[i];
    edc[i] = acc;
  }
  if (acc <= 0.0) throw DataError("silent impulse response");
  const double hi = -5.0, lo = -5.0 - range_db;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double db = 10.0 * std::log10(std::max(edc[i] / acc, 1e-300));
    if (db > hi || db < lo) continue;
    const double t = static_cast<double>(i) / sample_rate;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  if (count < 2) throw DataError("decay range not reached");
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  if (!(slope < 0.0)) throw DataError("impulse response does not decay");
  return -60.0 / slope;
}

}  // namespace farfield::simulate
