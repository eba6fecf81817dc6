#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace farfield::simulate {

// Shoebox room with its sources and receivers. Positions are in meters with
// the origin at a corner.
struct RoomSpec {
  Eigen::Vector3d dimensions{5.0, 4.0, 3.0};
  double t60 = 0.5;
  // Wall energy absorption in (0, 1]; derived from t60 when unset.
  std::optional<double> absorption;
  std::vector<Eigen::Vector3d> sources;
  std::vector<Eigen::Vector3d> receivers;
  double speed_of_sound = 343.0;

  // Throws ConfigError on non-positive sizes or positions outside the room.
  void Validate() const;
  double Volume() const;
  double SurfaceArea() const;
  // Energy absorption used for every wall; unless set, chosen so that the
  // image-source decay of this room shape matches t60.
  double Absorption() const;
  // Pressure reflection coefficient sqrt(1 - absorption).
  double ReflectionCoefficient() const;
};

struct RoomRanges {
  Eigen::Vector3d min_dimensions{3.0, 3.0, 2.4};
  Eigen::Vector3d max_dimensions{8.0, 6.0, 3.5};
  double min_t60 = 0.2;
  double max_t60 = 0.8;
  int num_sources = 20;
  int num_receivers = 10;
  double wall_clearance = 0.3;
  double min_source_receiver_distance = 0.5;
  int max_attempts = 1000;

  void Validate() const;
};

// Uniform room size and t60, then uniform positions subject to the wall
// clearance and the source-receiver spacing. Throws ConfigError when the
// constraints cannot be met.
RoomSpec SampleRoom(const RoomRanges& ranges, std::uint64_t seed);

}  // namespace farfield::simulate
