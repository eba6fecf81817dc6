#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "farfield/core/audio.h"
#include "farfield/core/segmentation.h"
#include "farfield/simulate/mixture.h"
#include "farfield/simulate/room.h"

namespace farfield::simulate {

struct DryClip {
  std::string speaker;
  Eigen::VectorXd audio;
};

struct SeparationExampleConfig {
  int count = 10;
  double length = 4.0;           // seconds
  int max_speakers = 3;
  int max_concurrent = 2;
  int render_channels = 10;
  int keep_channels = 6;
  double min_segment = 1.0;      // seconds
  double min_snr_db = 5.0;
  double max_snr_db = 20.0;
  double noise_rms = 0.01;       // used when no speaker is present
  int sample_rate = 16000;
  RoomRanges rooms;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct SeparationExample {
  MultichannelAudio mixture;                // kept channels only
  std::vector<MultichannelAudio> targets;   // per speaker, reverberant image
  std::vector<std::string> speakers;
  MultichannelAudio noise;
  Segmentation segmentation;
  std::vector<int> channels;                // kept receivers, ascending
  RoomSpec room;
  double snr_db = 0.0;
};

// Fixed-length examples with 0..max_speakers speakers of which at most
// `max_concurrent` talk at once. Examples are rendered on render_channels
// receivers and reduced to the keep_channels best by envelope variance.
std::vector<SeparationExample> SimulateSeparationExamples(
    const SeparationExampleConfig& cfg, const std::vector<DryClip>& corpus);

}  // namespace farfield::simulate
