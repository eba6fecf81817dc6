#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "farfield/core/segmentation.h"
#include "farfield/metrics/der.h"
#include "farfield/pipeline/config.h"
#include "farfield/pipeline/manifest.h"

namespace farfield::pipeline {

struct RunContext {
  std::filesystem::path run_dir;  // runs/<run-id>
  PipelineConfig config;
  int workers = 1;
};

struct PreprocessOutput {
  std::filesystem::path dir;
  std::vector<int> selected;   // original channel indices, ascending
  std::vector<double> scores;  // envelope-variance score per channel
  bool cache_hit = false;
};

// Clip-normalization, WPE and channel selection. Writes orig.wav, wpe.wav
// (selected channels) and report.json under <run>/preprocess/<session>.
PreprocessOutput RunPreprocess(const SessionManifest& session,
                               const RunContext& ctx);

struct GridOutput {
  std::map<int, std::vector<Segmentation>> cells;  // per channel
  std::map<int, Segmentation> fused;                // per channel
  bool cache_hit = false;
};

// Every (vad source, variant, thr) cell on each channel, fused per channel.
// Cells without embeddings are skipped with a warning.
GridOutput RunDiarizeGrid(const SessionManifest& session, const RunContext& ctx,
                          const std::vector<int>& channels);

struct SessionReport {
  std::string session_id;
  int num_speakers = 0;
  std::optional<int> reference_speakers;
  std::optional<metrics::DerBreakdown> der;
  std::optional<double> mean_si_sdr;
  int segments = 0;
};

// Full pipeline for every session: preprocess, diarization grid, per-channel
// soft fusion, cross-channel fusion, segment extension, GSS and scoring.
// The resolved configuration is written to <run>/config.json.
std::vector<SessionReport> RunFull(const Manifest& manifest, const RunContext& ctx);

// Forward selection of hypotheses whose DOVER-Lap fusion minimizes DER
// against `reference`; stops when no addition lowers the DER.
std::vector<int> GreedyFusionSelection(const std::vector<Segmentation>& hypotheses,
                                       const Segmentation& reference,
                                       double collar = 0.0);

// Macro-averaged text table of per-session DER and count accuracy.
std::string FormatScoreTable(const std::vector<SessionReport>& reports);

}  // namespace farfield::pipeline
