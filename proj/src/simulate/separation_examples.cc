#include "farfield/simulate/separation_examples.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "farfield/core/errors.h"
#include "farfield/preprocess/channel_rank.h"
#include "farfield/simulate/conversation.h"

namespace farfield::simulate {

void SeparationExampleConfig::Validate() const {
  if (count < 0 || !(length > 0.0) || sample_rate <= 0) {
    throw ConfigError("invalid separation example size");
  }
  if (max_speakers < 0 || max_concurrent < 1) {
    throw ConfigError("invalid speaker limits");
  }
  if (render_channels < 1 || keep_channels < 1 || keep_channels > render_channels ||
      render_channels > rooms.num_receivers) {
    throw ConfigError("invalid channel counts");
  }
  if (!(min_segment > 0.0) || min_segment > length) {
    throw ConfigError("min_segment must lie in (0, length]");
  }
  if (max_snr_db < min_snr_db || !(noise_rms > 0.0)) {
    throw ConfigError("invalid noise settings");
  }
  rooms.Validate();
}

std::vector<SeparationExample> SimulateSeparationExamples(
    const SeparationExampleConfig& cfg, const std::vector<DryClip>& corpus) {
  cfg.Validate();
  std::map<std::string, std::vector<int>> by_speaker;
  for (int i = 0; i < static_cast<int>(corpus.size()); ++i) {
    by_speaker[corpus[i].speaker].push_back(i);
  }
  std::vector<std::string> talkers;
  for (const auto& [name, clips] : by_speaker) talkers.push_back(name);
  const int max_speakers = std::min<int>(
      {cfg.max_speakers, static_cast<int>(talkers.size()), cfg.rooms.num_sources});

  std::vector<SeparationExample> examples;
  for (int e = 0; e < cfg.count; ++e) {
    std::mt19937_64 rng = TaskRng(cfg.seed, static_cast<std::uint64_t>(e));
    auto uniform = [&rng](double lo, double hi) {
      return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    RoomSpec room = SampleRoom(cfg.rooms, rng());
    const int k = std::uniform_int_distribution<int>(0, max_speakers)(rng);

    std::vector<std::string> chosen = talkers;
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(k);

    MixtureSpec spec;
    spec.session_id = "example" + std::to_string(e);
    spec.speakers = chosen;
    spec.duration = cfg.length;
    spec.channels = cfg.render_channels;
    spec.sample_rate = cfg.sample_rate;
    DryStore store;
    std::vector<ScheduledTurn> placed;
    for (int s = 0; s < k; ++s) {
      const auto& clips = by_speaker[chosen[s]];
      const DryClip& clip =
          corpus[clips[std::uniform_int_distribution<std::size_t>(0, clips.size() - 1)(rng)]];
      const double clip_len = static_cast<double>(clip.audio.size()) / cfg.sample_rate;
      // Retry placements until the concurrency limit holds.
      for (int attempt = 0; attempt < 100; ++attempt) {
        const double hi = std::min(cfg.length, clip_len);
        const double len = hi > cfg.min_segment ? uniform(cfg.min_segment, hi) : hi;
        const double start = std::floor(uniform(0.0, cfg.length - len) * cfg.sample_rate) /
                             cfg.sample_rate;
        std::vector<ScheduledTurn> trial = placed;
        trial.push_back({s, start, len});
        if (MaxConcurrency(trial) > cfg.max_concurrent) continue;
        placed = std::move(trial);
        const std::string id = chosen[s] + "_" + std::to_string(e);
        const auto n = static_cast<Eigen::Index>(std::llround(len * cfg.sample_rate));
        const auto offset = static_cast<Eigen::Index>(
            std::uniform_int_distribution<Eigen::Index>(0, clip.audio.size() - n)(rng));
        store[id] = clip.audio.segment(offset, n);
        spec.utterances.push_back({chosen[s], id, start});
        break;
      }
    }

    std::normal_distribution<double> normal;
    Eigen::VectorXd noise(static_cast<Eigen::Index>(std::llround(cfg.length * cfg.sample_rate)));
    for (auto& v : noise) v = normal(rng);
    store["noise"] = noise;
    const double snr = uniform(cfg.min_snr_db, cfg.max_snr_db);
    spec.noise = NoiseSpec{"noise", spec.utterances.empty() ? 0.0 : snr, std::nullopt};

    MixtureResult mix = SimulateMixture(spec, room, store);
    if (spec.utterances.empty()) {
      mix.noise_image.samples *= cfg.noise_rms;
      mix.mixture.samples = mix.noise_image.samples;
    }

    const auto ranking = preprocess::EnvelopeVarianceRank(mix.mixture);
    std::vector<int> keep(ranking.order.begin(), ranking.order.begin() + cfg.keep_channels);
    std::sort(keep.begin(), keep.end());

    SeparationExample ex;
    ex.channels = keep;
    ex.room = std::move(room);
    ex.snr_db = spec.utterances.empty() ? 0.0 : snr;
    ex.segmentation = mix.reference;
    ex.noise = mix.noise_image.SelectChannels(keep);
    ex.mixture = MultichannelAudio::Zeros(cfg.keep_channels, mix.mixture.length(), cfg.sample_rate);
    for (const auto& u : spec.utterances) {
      ex.speakers.push_back(u.speaker);
      ex.targets.push_back(mix.speaker_images[u.speaker].SelectChannels(keep));
      ex.mixture.samples += ex.targets.back().samples;
    }
    ex.mixture.samples += ex.noise.samples;
    examples.push_back(std::move(ex));
  }
  return examples;
}

}  // namespace farfield::simulate
