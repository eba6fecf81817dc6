#include "farfield/gss/extract.h"

#include <algorithm>
#include <cmath>

#include "farfield/core/errors.h"
#include "farfield/gss/mvdr.h"
#include "farfield/preprocess/wpe.h"

namespace farfield::gss {

ExtractionResult ExtractSpeakerSegment(const MultichannelAudio& session,
                                       const Turn& turn,
                                       const fusion::SoftActivity& activities,
                                       const GssConfig& cfg) {
  cfg.Validate();
  if (session.channels() < 2) throw DataError("GSS needs at least two channels");
  if (!(turn.start < turn.end) || turn.start < 0.0 ||
      turn.start >= session.duration()) {
    throw DataError("turn lies outside the session");
  }
  int target_row = -1;
  for (int s = 0; s < activities.speakers(); ++s) {
    if (activities.Label(s) == turn.speaker) target_row = s;
  }
  if (target_row < 0) {
    throw DataError("no activity for speaker '" + turn.speaker + "'");
  }

  const double rate = session.sample_rate;
  const auto turn_begin = static_cast<Eigen::Index>(std::llround(turn.start * rate));
  const auto turn_end = std::min<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(turn.end * rate)), session.length());
  const auto margin = static_cast<Eigen::Index>(std::llround(cfg.context_margin * rate));
  const Eigen::Index begin = std::max<Eigen::Index>(0, turn_begin - margin);
  const Eigen::Index end = std::min(session.length(), turn_end + margin);
  const MultichannelAudio window = session.Slice(begin, end);
  const double start_time = static_cast<double>(begin) / rate;

  // Speakers without activity in the window do not get a mixture component.
  fusion::SoftActivity local = activities;
  local.labels.clear();
  std::vector<int> rows;
  const int first = activities.FrameAt(start_time);
  const int last = activities.FrameAt(static_cast<double>(end) / rate);
  for (int s = 0; s < activities.speakers(); ++s) {
    const double peak = activities.frames() > 0
                            ? activities.probs.row(s).segment(first, last - first + 1).maxCoeff()
                            : 0.0;
    if (s == target_row || peak > 0.0) rows.push_back(s);
  }
  local.probs.resize(static_cast<Eigen::Index>(rows.size()), activities.frames());
  int target_source = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    local.probs.row(static_cast<Eigen::Index>(i)) = activities.probs.row(rows[i]);
    local.labels.push_back(activities.Label(rows[i]));
    if (rows[i] == target_row) target_source = static_cast<int>(i);
  }

  SpectralTensor spec = Stft(window, cfg.stft);
  if (cfg.wpe_enabled && spec.frames() >= cfg.wpe.taps + cfg.wpe.delay) {
    spec = preprocess::WpeDereverberate(spec, cfg.wpe);
  }
  CacgmmResult em = ChunkedCacgmm(spec, local, cfg, start_time);
  const BeamformResult bf = MvdrBeamform(spec, em.masks, target_source);
  const MultichannelAudio enhanced = Istft(bf.output, cfg.stft);

  ExtractionResult out;
  out.reference_channel = bf.reference_channel;
  out.start_sample = turn_begin;
  out.waveform = enhanced.samples.row(0)
                     .segment(turn_begin - begin, turn_end - turn_begin)
                     .transpose();
  out.log_likelihood = std::move(em.log_likelihood);
  out.masks = std::move(em.masks);
  out.target_source = target_source;
  return out;
}

}  // namespace farfield::gss
