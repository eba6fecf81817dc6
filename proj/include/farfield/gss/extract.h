#pragma once

#include <vector>

#include <Eigen/Dense>

#include "farfield/core/audio.h"
#include "farfield/core/segmentation.h"
#include "farfield/fusion/soft_activity.h"
#include "farfield/gss/cacgmm.h"

namespace farfield::gss {

struct ExtractionResult {
  Eigen::VectorXd waveform;  // covers exactly the (unextended) turn
  int reference_channel = 0;
  Eigen::Index start_sample = 0;
  std::vector<std::vector<double>> log_likelihood;  // per bin (and chunk)
  MaskTensor masks;          // over the extended window
  int target_source = 0;     // row of the target in `masks`
};

// Extends the turn by cfg.context_margin, optionally dereverberates, runs
// guided (chunked) cACGMM with a noise source and beamforms the turn's
// speaker, then crops back to the turn. `activities` labels must contain
// the turn's speaker.
ExtractionResult ExtractSpeakerSegment(const MultichannelAudio& session,
                                       const Turn& turn,
                                       const fusion::SoftActivity& activities,
                                       const GssConfig& cfg);

}  // namespace farfield::gss
