#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace farfield::pipeline {

struct EmbeddingRef {
  int channel = 0;
  std::string variant;  // e.g. "orig" or "wpe"
  std::string vad;      // activity-segment source
  std::filesystem::path path;
};

struct ActivityRef {
  int channel = 0;
  std::string model;
  std::filesystem::path path;
};

struct SessionManifest {
  std::string session_id;
  // One or more WAV files whose channels are stacked in order.
  std::vector<std::filesystem::path> audio;
  int sample_rate = 16000;
  std::vector<EmbeddingRef> embeddings;
  std::vector<ActivityRef> activities;
  std::optional<std::filesystem::path> reference_rttm;
  // Reverberant image of each reference speaker, used for SI-SDR.
  std::vector<std::pair<std::string, std::filesystem::path>> speaker_images;

  // Throws DataError naming the first referenced file that does not exist.
  void CheckFiles() const;
};

struct Manifest {
  std::vector<SessionManifest> sessions;
};

// Relative paths are resolved against `base_dir`.
Manifest ManifestFromJson(const nlohmann::json& j,
                          const std::filesystem::path& base_dir);
nlohmann::json ManifestToJson(const Manifest& manifest);
Manifest LoadManifest(const std::filesystem::path& path);

}  // namespace farfield::pipeline
