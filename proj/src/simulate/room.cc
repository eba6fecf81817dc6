#include "farfield/simulate/room.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "farfield/core/errors.h"

namespace farfield::simulate {
namespace {

bool Inside(const Eigen::Vector3d& p, const Eigen::Vector3d& dims) {
  return (p.array() > 0.0).all() && (p.array() < dims.array()).all();
}

}  // namespace

void RoomSpec::Validate() const {
  if ((dimensions.array() <= 0.0).any()) {
    throw ConfigError("room dimensions must be positive");
  }
  if (!(t60 > 0.0)) throw ConfigError("t60 must be positive");
  if (absorption && !(*absorption > 0.0 && *absorption <= 1.0)) {
    throw ConfigError("absorption must lie in (0, 1]");
  }
  if (!(speed_of_sound > 0.0)) throw ConfigError("speed of sound must be positive");
  for (const auto& p : sources) {
    if (!Inside(p, dimensions)) throw ConfigError("source outside the room");
  }
  for (const auto& p : receivers) {
    if (!Inside(p, dimensions)) throw ConfigError("receiver outside the room");
  }
}

double RoomSpec::Volume() const { return dimensions.prod(); }

double RoomSpec::SurfaceArea() const {
  const auto& d = dimensions;
  return 2.0 * (d.x() * d.y() + d.y() * d.z() + d.x() * d.z());
}

namespace {

// Image sources seen along direction u have undergone about
// c t sum_i |u_i| / L_i reflections after t seconds, so the energy decays as
// the directional average of exp(-gamma g(u) t) with g(u) = sum_i |u_i| / L_i
// and gamma = -c ln(1 - a). The Schroeder curve of that average is
// (1/gamma) F(gamma t); the T60 it implies is therefore tau / gamma, where tau
// depends only on the room shape and is computed here for gamma = 1 with the
// same -5 to -25 dB fit as SchroederT60.
double ShapeDecayTime(const Eigen::Vector3d& dims) {
  constexpr int kDirections = 4096;
  std::vector<double> g(kDirections);
  double g_mean = 0.0;
  // Fibonacci lattice over the upper hemisphere; g(u) is symmetric in sign.
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < kDirections; ++k) {
    const double z = (k + 0.5) / kDirections;
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * k;
    g[static_cast<std::size_t>(k)] = std::abs(r * std::cos(phi)) / dims.x() +
                                     std::abs(r * std::sin(phi)) / dims.y() + z / dims.z();
    g_mean += g[static_cast<std::size_t>(k)] / kDirections;
  }
  auto edc = [&](double t) {
    double sum = 0.0;
    for (double gk : g) sum += std::exp(-gk * t) / gk;
    return sum;
  };
  const double e0 = edc(0.0);
  const double dt = 0.02 / g_mean;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int i = 0;; ++i) {
    const double t = i * dt;
    const double db = 10.0 * std::log10(edc(t) / e0);
    if (db < -25.0) break;
    if (db > -5.0) continue;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return -60.0 / slope;
}

}  // namespace

double RoomSpec::Absorption() const {
  if (absorption) return *absorption;
  const double gamma = ShapeDecayTime(dimensions) / t60;
  return 1.0 - std::exp(-gamma / speed_of_sound);
}

double RoomSpec::ReflectionCoefficient() const {
  return std::sqrt(std::max(0.0, 1.0 - Absorption()));
}

void RoomRanges::Validate() const {
  if ((min_dimensions.array() <= 0.0).any() ||
      (max_dimensions.array() < min_dimensions.array()).any()) {
    throw ConfigError("invalid room dimension range");
  }
  if (!(min_t60 > 0.0) || max_t60 < min_t60) {
    throw ConfigError("invalid t60 range");
  }
  if (num_sources < 0 || num_receivers < 0 || wall_clearance < 0.0 ||
      min_source_receiver_distance < 0.0 || max_attempts < 1) {
    throw ConfigError("invalid room placement settings");
  }
  if ((min_dimensions.array() <= 2.0 * wall_clearance).any()) {
    throw ConfigError("wall clearance leaves no room for positions");
  }
}

RoomSpec SampleRoom(const RoomRanges& ranges, std::uint64_t seed) {
  ranges.Validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  RoomSpec room;
  for (int i = 0; i < 3; ++i) {
    room.dimensions[i] = uniform(ranges.min_dimensions[i], ranges.max_dimensions[i]);
  }
  room.t60 = uniform(ranges.min_t60, ranges.max_t60);

  const double m = ranges.wall_clearance;
  auto position = [&] {
    Eigen::Vector3d p;
    for (int i = 0; i < 3; ++i) p[i] = uniform(m, room.dimensions[i] - m);
    return p;
  };
  for (int r = 0; r < ranges.num_receivers; ++r) room.receivers.push_back(position());

  for (int s = 0; s < ranges.num_sources; ++s) {
    bool placed = false;
    for (int attempt = 0; attempt < ranges.max_attempts && !placed; ++attempt) {
      const Eigen::Vector3d p = position();
      placed = true;
      for (const auto& r : room.receivers) {
        if ((p - r).norm() < ranges.min_source_receiver_distance) placed = false;
      }
      if (placed) room.sources.push_back(p);
    }
    if (!placed) {
      throw ConfigError("could not place source " + std::to_string(s) +
                        " after " + std::to_string(ranges.max_attempts) +
                        " attempts");
    }
  }
  return room;
}

}  // namespace farfield::simulate
