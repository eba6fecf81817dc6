#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "farfield/core/audio.h"
#include "farfield/core/segmentation.h"
#include "farfield/simulate/rir.h"
#include "farfield/simulate/room.h"

namespace farfield::simulate {

// Mono dry recordings by id.
using DryStore = std::map<std::string, Eigen::VectorXd>;

struct PlacedUtterance {
  std::string speaker;
  std::string audio;  // key into the DryStore
  double start = 0.0;
};

struct NoiseSpec {
  std::string audio;  // key into the DryStore
  // Speech-to-noise ratio; +inf renders no noise.
  double snr_db = std::numeric_limits<double>::infinity();
  // Point source index; unset adds the recording to every channel with a
  // channel-dependent circular shift.
  std::optional<int> source;
};

struct MixtureSpec {
  std::string session_id = "session";
  std::vector<std::string> speakers;
  std::vector<PlacedUtterance> utterances;
  std::optional<NoiseSpec> noise;
  double duration = 0.0;  // seconds
  int channels = 1;
  int sample_rate = 16000;
  // Room source of each speaker; defaults to the speaker's index.
  std::map<std::string, int> source_of;

  void Validate(const RoomSpec& room) const;
};

struct MixtureResult {
  MultichannelAudio mixture;
  Segmentation reference;
  std::map<std::string, MultichannelAudio> speaker_images;
  MultichannelAudio noise_image;
  double noise_gain = 0.0;
};

// Convolves every utterance with the RIRs of its source to receivers
// 0..channels-1 and sums the images. Noise is scaled against the mean power
// of the speech image over the samples where someone speaks.
MixtureResult SimulateMixture(const MixtureSpec& spec, const RoomSpec& room,
                              const DryStore& store, const RirOptions& rir = {});

// Voiced test signal: a pulse train at a talker-specific pitch through two
// resonators retuned every syllable, under a syllabic envelope.
Eigen::VectorXd SpeechLikeSignal(double seconds, int sample_rate,
                                 std::mt19937_64& rng);

// Independent generator for task `task` of a run seeded with `seed`.
std::mt19937_64 TaskRng(std::uint64_t seed, std::uint64_t task);

}  // namespace farfield::simulate
