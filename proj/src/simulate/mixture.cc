#include "farfield/simulate/mixture.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "farfield/core/errors.h"
#include "farfield/core/logging.h"
#include "farfield/core/signal_ops.h"

namespace farfield::simulate {
namespace {

int SourceOf(const MixtureSpec& spec, const std::string& speaker) {
  if (auto it = spec.source_of.find(speaker); it != spec.source_of.end()) {
    return it->second;
  }
  const auto pos = std::find(spec.speakers.begin(), spec.speakers.end(), speaker);
  return static_cast<int>(pos - spec.speakers.begin());
}

const Eigen::VectorXd& Lookup(const DryStore& store, const std::string& id) {
  auto it = store.find(id);
  if (it == store.end()) throw DataError("dry audio '" + id + "' is missing");
  return it->second;
}

}  // namespace

void MixtureSpec::Validate(const RoomSpec& room) const {
  if (channels < 1 || channels > static_cast<int>(room.receivers.size())) {
    throw ConfigError("channel count exceeds the room's receivers");
  }
  if (!(duration > 0.0) || sample_rate <= 0) {
    throw ConfigError("mixture duration and sample rate must be positive");
  }
  for (const auto& u : utterances) {
    if (std::find(speakers.begin(), speakers.end(), u.speaker) == speakers.end()) {
      throw ConfigError("utterance speaker '" + u.speaker + "' is not listed");
    }
    if (u.start < 0.0 || u.start >= duration) {
      throw ConfigError("utterance start lies outside the mixture");
    }
    const int src = SourceOf(*this, u.speaker);
    if (src < 0 || src >= static_cast<int>(room.sources.size())) {
      throw ConfigError("speaker '" + u.speaker + "' has no room source");
    }
  }
  if (noise && noise->source &&
      (*noise->source < 0 || *noise->source >= static_cast<int>(room.sources.size()))) {
    throw ConfigError("noise source out of range");
  }
}

MixtureResult SimulateMixture(const MixtureSpec& spec, const RoomSpec& room,
                              const DryStore& store, const RirOptions& rir_opts) {
  spec.Validate(room);
  RirOptions opts = rir_opts;
  opts.sample_rate = spec.sample_rate;
  const auto length =
      static_cast<Eigen::Index>(std::llround(spec.duration * spec.sample_rate));

  MixtureResult out;
  out.reference.session_id = spec.session_id;
  std::map<int, std::vector<Eigen::VectorXd>> rirs;
  auto rirs_for = [&](int src) -> const std::vector<Eigen::VectorXd>& {
    auto& cached = rirs[src];
    if (cached.empty()) {
      for (int c = 0; c < spec.channels; ++c) {
        cached.push_back(GenerateRir(room, src, c, opts).taps);
      }
    }
    return cached;
  };

  for (const auto& name : spec.speakers) {
    out.speaker_images[name] = MultichannelAudio::Zeros(spec.channels, length, spec.sample_rate);
  }
  Eigen::VectorXi speech_active = Eigen::VectorXi::Zero(length);
  for (const auto& u : spec.utterances) {
    const Eigen::VectorXd& dry = Lookup(store, u.audio);
    const auto offset = static_cast<Eigen::Index>(std::llround(u.start * spec.sample_rate));
    Eigen::Index n = dry.size();
    if (offset + n > length) {
      Logger()->warn("utterance '{}' of {} truncated at the mixture end", u.audio, u.speaker);
      n = length - offset;
    }
    if (n <= 0) continue;
    out.reference.turns.push_back(
        {u.speaker, static_cast<double>(offset) / spec.sample_rate,
         static_cast<double>(offset + n) / spec.sample_rate});
    speech_active.segment(offset, n).setOnes();
    const auto& h = rirs_for(SourceOf(spec, u.speaker));
    auto& image = out.speaker_images[u.speaker].samples;
    const Eigen::VectorXd head = dry.head(n);
    for (int c = 0; c < spec.channels; ++c) {
      const Eigen::VectorXd wet = FftConvolve(head, h[c]);
      const Eigen::Index m = std::min<Eigen::Index>(wet.size(), length - offset);
      image.row(c).segment(offset, m) += wet.head(m).transpose();
    }
  }
  out.reference.Sort();

  out.mixture = MultichannelAudio::Zeros(spec.channels, length, spec.sample_rate);
  for (const auto& name : spec.speakers) {
    out.mixture.samples += out.speaker_images[name].samples;
  }

  out.noise_image = MultichannelAudio::Zeros(spec.channels, length, spec.sample_rate);
  if (spec.noise && std::isfinite(spec.noise->snr_db)) {
    const Eigen::VectorXd& noise = Lookup(store, spec.noise->audio);
    if (noise.size() == 0) throw DataError("noise recording is empty");
    SampleMatrix raw = SampleMatrix::Zero(spec.channels, length);
    if (spec.noise->source) {
      const auto& h = rirs_for(*spec.noise->source);
      for (int c = 0; c < spec.channels; ++c) {
        const Eigen::VectorXd wet = FftConvolve(noise.head(std::min(noise.size(), length)), h[c]);
        const Eigen::Index m = std::min(wet.size(), length);
        raw.row(c).head(m) = wet.head(m).transpose();
      }
    } else {
      for (int c = 0; c < spec.channels; ++c) {
        const Eigen::Index shift = noise.size() * c / spec.channels;
        for (Eigen::Index i = 0; i < length; ++i) {
          raw(c, i) = noise[(i + shift) % noise.size()];
        }
      }
    }
    double speech_power = 0.0;
    const Eigen::Index active = speech_active.sum();
    for (Eigen::Index i = 0; i < length; ++i) {
      if (speech_active[i]) speech_power += out.mixture.samples.col(i).squaredNorm();
    }
    const double noise_power = raw.squaredNorm() / static_cast<double>(raw.size());
    if (active > 0 && speech_power > 0.0 && noise_power > 0.0) {
      speech_power /= static_cast<double>(active * spec.channels);
      out.noise_gain = std::sqrt(speech_power / noise_power *
                                 std::pow(10.0, -spec.noise->snr_db / 10.0));
    } else {
      Logger()->warn("no speech in '{}'; noise rendered at unit gain", spec.session_id);
      out.noise_gain = 1.0;
    }
    out.noise_image.samples = out.noise_gain * raw;
    out.mixture.samples += out.noise_image.samples;
  }
  return out;
}

Eigen::VectorXd SpeechLikeSignal(double seconds, int sample_rate, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(std::llround(seconds * sample_rate));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double fs = sample_rate;
  const double two_pi = 2.0 * std::numbers::pi;
  const double f0 = 90.0 + 150.0 * unit(rng);    // talker pitch
  const double rate = 3.0 + 3.0 * unit(rng);     // syllables per second
  const double vibrato = 0.5 + unit(rng);
  double phase = unit(rng), syllable = unit(rng), drift = 0.0;

  // Two resonators whose centre frequencies are redrawn every syllable.
  struct Resonator {
    double a1 = 0.0, a2 = 0.0, y1 = 0.0, y2 = 0.0;
    void Tune(double freq, double bandwidth, double fs) {
      const double r = std::exp(-std::numbers::pi * bandwidth / fs);
      a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / fs);
      a2 = -r * r;
    }
    double Step(double x) {
      const double y = x + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      return y;
    }
  };
  Resonator f1, f2;
  auto retune = [&] {
    f1.Tune(300.0 + 600.0 * unit(rng), 80.0, fs);
    f2.Tune(900.0 + 1600.0 * unit(rng), 120.0, fs);
  };
  retune();

  Eigen::VectorXd x(n);
  double period_scale = 1.0, contour = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    drift = 0.9995 * drift + 0.002 * normal(rng);
    const double pitch = f0 * contour * period_scale *
                         (1.0 + 0.08 * std::sin(two_pi * vibrato * t) + drift);
    phase += pitch / fs;
    double excitation = 0.02 * normal(rng);
    if (phase >= 1.0) {
      // Cycle-to-cycle jitter keeps the harmonics from being predictable
      // over many frames.
      phase -= 1.0;
      excitation += 1.0 + 0.1 * normal(rng);
      period_scale = 1.0 + 0.03 * normal(rng);
    }
    syllable += rate / fs;
    if (syllable >= 1.0) {
      syllable -= 1.0;
      contour = 0.8 + 0.4 * unit(rng);
      retune();
    }
    const double envelope = std::pow(std::sin(std::numbers::pi * syllable), 2.0);
    const double y = f2.Step(f1.Step(excitation));
    x[i] = envelope * y;
  }
  const double peak = x.cwiseAbs().maxCoeff();
  if (peak > 0.0) x *= 0.3 / peak;
  return x;
}

std::mt19937_64 TaskRng(std::uint64_t seed, std::uint64_t task) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(task >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace farfield::simulate
