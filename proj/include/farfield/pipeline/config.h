#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "farfield/core/stft.h"
#include "farfield/diarize/clustering.h"
#include "farfield/diarize/reduce.h"
#include "farfield/gss/cacgmm.h"
#include "farfield/preprocess/channel_rank.h"
#include "farfield/preprocess/clip_normalize.h"
#include "farfield/preprocess/wpe.h"

namespace farfield::pipeline {

struct PreprocessSettings {
  preprocess::ClipNormConfig clip;
  bool wpe_enabled = true;
  preprocess::WpeConfig wpe;
  StftParams stft;
  preprocess::EnvelopeVarianceConfig ranking;
  double channel_fraction = 0.8;
};

struct DiarizeSettings {
  diarize::DiarizeConfig cluster;
  diarize::Reduction reduction = diarize::Reduction::kLinear;
  // Grid axes: activity-segment sources x recording variants x thr values.
  std::vector<std::string> vad_sources{"vad"};
  std::vector<std::string> variants{"orig", "wpe"};
  std::vector<double> thr_values{5.0, 10.0, 20.0};
};

struct FusionSettings {
  double binarize_threshold = 0.5;
  // Cross-channel fusion weights by channel index; missing channels weigh 1.
  std::map<int, double> channel_weights;
};

struct GssSettings {
  bool enabled = true;
  gss::GssConfig gss;
};

struct ScoreSettings {
  double collar = 0.0;
};

struct PipelineConfig {
  PreprocessSettings preprocess;
  DiarizeSettings diarize;
  FusionSettings fusion;
  GssSettings gss;
  ScoreSettings score;
  std::uint64_t seed = 0;

  // Throws ConfigError on invalid values.
  void Validate() const;
};

// Missing keys take their defaults; unknown keys and type mismatches raise
// ConfigError naming the offending key.
PipelineConfig ConfigFromJson(const nlohmann::json& j);
nlohmann::json ConfigToJson(const PipelineConfig& cfg);
PipelineConfig LoadConfig(const std::filesystem::path& path);

}  // namespace farfield::pipeline
