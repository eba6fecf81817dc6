#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "farfield/simulate/conversation.h"
#include "farfield/simulate/oracle_features.h"
#include "farfield/simulate/room.h"

namespace farfield::pipeline {

struct OracleFeatureSettings {
  bool enabled = false;
  simulate::OracleEmbeddingConfig embeddings;
  double activity_step = 0.01;
  double activity_noise = 0.1;
  std::vector<std::string> vad_sources{"vad"};
  std::vector<std::string> variants{"orig", "wpe"};
};

struct SimulationConfig {
  std::string session_id = "sim";
  int sample_rate = 16000;
  double duration = 60.0;
  int speakers = 4;
  int channels = 4;
  simulate::RoomRanges room;
  simulate::OverlapStats overlap;
  double snr_db = std::numeric_limits<double>::infinity();
  OracleFeatureSettings oracle;

  void Validate() const;
};

SimulationConfig SimulationConfigFromJson(const nlohmann::json& j);
nlohmann::json SimulationConfigToJson(const SimulationConfig& cfg);

struct DryCorpusEntry {
  std::filesystem::path path;
  std::string speaker;
};

// Dry-corpus manifest: a JSON array of {"path", "speaker", "duration"}.
std::vector<DryCorpusEntry> LoadDryCorpus(const std::filesystem::path& path);

// Samples a room and a conversation, renders the mixture and writes
// mixture.wav, reference.rttm, metadata.json, one reverberant image per
// speaker and a session manifest (manifest.json) into `out_dir`. Without a
// corpus, speech-like noise stands in for dry speech.
void SimulateSession(const SimulationConfig& cfg,
                     const std::vector<DryCorpusEntry>& corpus,
                     std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace farfield::pipeline
