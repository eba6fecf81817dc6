#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "farfield/core/segmentation.h"

namespace farfield::fusion {

// Per-speaker, per-frame activity probabilities. Frame t covers
// [t * frame_step, (t + 1) * frame_step).
struct SoftActivity {
  std::string session_id;
  Eigen::MatrixXd probs;  // speakers x frames, values in [0, 1]
  double frame_step = 0.01;
  std::string source_tag;
  std::vector<std::string> labels;  // optional; defaults to spk<i>

  int speakers() const { return static_cast<int>(probs.rows()); }
  int frames() const { return static_cast<int>(probs.cols()); }
  std::string Label(int speaker) const;
  // Throws DataError on out-of-range probabilities, a non-positive step or
  // a label count that does not match the speaker count.
  void Validate() const;
  // Frame containing time `seconds`, clamped to the matrix.
  int FrameAt(double seconds) const;
};

// Binary layout (little-endian): "ACT1", speakers u32, frames u32,
// frame_step f64, then speakers * frames f32 in row-major order.
SoftActivity ReadSoftActivity(const std::filesystem::path& path);
void WriteSoftActivity(const std::filesystem::path& path,
                       const SoftActivity& activity);

// 0/1 activity of `speakers` (rows in that order) on a frame grid; a frame is
// active when its center lies inside a turn.
SoftActivity Rasterize(const Segmentation& seg,
                       const std::vector<std::string>& speakers,
                       double frame_step, int frames);

}  // namespace farfield::fusion
