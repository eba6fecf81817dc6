#include "farfield/pipeline/simulate_session.h"

#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "farfield/core/errors.h"
#include "farfield/core/logging.h"
#include "farfield/core/wav_io.h"
#include "farfield/diarize/embedding_set.h"
#include "farfield/fusion/soft_activity.h"
#include "farfield/pipeline/artifacts.h"
#include "farfield/simulate/mixture.h"

namespace farfield::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <typename T>
void Read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void CheckKeys(const json& j, const std::vector<std::string>& keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(where + "." + key + ": unknown key");
    }
  }
}

Eigen::Vector3d Vec3(const json& j, const std::string& where) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": expected three numbers");
  }
  if (v.size() != 3) throw ConfigError(where + ": expected three numbers");
  return {v[0], v[1], v[2]};
}

json Vec3Json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

void SimulationConfig::Validate() const {
  if (session_id.empty()) throw ConfigError("session_id must not be empty");
  if (sample_rate <= 0 || !(duration > 0.0)) {
    throw ConfigError("sample_rate and duration must be positive");
  }
  if (speakers < 1 || speakers > room.num_sources) {
    throw ConfigError("speaker count must lie in [1, room sources]");
  }
  if (channels < 1 || channels > room.num_receivers) {
    throw ConfigError("channel count must lie in [1, room receivers]");
  }
  room.Validate();
  overlap.Validate();
  if (std::isnan(snr_db)) throw ConfigError("snr_db must be a number or null");
  if (oracle.enabled &&
      (oracle.embeddings.dim < 2 || !(oracle.embeddings.frame_step > 0.0) ||
       !(oracle.activity_step > 0.0) || oracle.activity_noise < 0.0)) {
    throw ConfigError("invalid oracle feature settings");
  }
}

SimulationConfig SimulationConfigFromJson(const json& j) {
  SimulationConfig cfg;
  CheckKeys(j, {"session_id", "sample_rate", "duration", "speakers", "channels", "room",
                "overlap", "snr_db", "oracle_features"},
            "simulation");
  Read(j, "session_id", cfg.session_id, "simulation");
  Read(j, "sample_rate", cfg.sample_rate, "simulation");
  Read(j, "duration", cfg.duration, "simulation");
  Read(j, "speakers", cfg.speakers, "simulation");
  Read(j, "channels", cfg.channels, "simulation");
  if (j.contains("snr_db") && !j.at("snr_db").is_null()) {
    Read(j, "snr_db", cfg.snr_db, "simulation");
  }
  if (j.contains("room")) {
    const json& r = j.at("room");
    CheckKeys(r, {"min_dimensions", "max_dimensions", "min_t60", "max_t60", "num_sources",
                  "num_receivers", "wall_clearance", "min_source_receiver_distance",
                  "max_attempts"},
              "room");
    if (r.contains("min_dimensions")) cfg.room.min_dimensions = Vec3(r["min_dimensions"], "room.min_dimensions");
    if (r.contains("max_dimensions")) cfg.room.max_dimensions = Vec3(r["max_dimensions"], "room.max_dimensions");
    Read(r, "min_t60", cfg.room.min_t60, "room");
    Read(r, "max_t60", cfg.room.max_t60, "room");
    Read(r, "num_sources", cfg.room.num_sources, "room");
    Read(r, "num_receivers", cfg.room.num_receivers, "room");
    Read(r, "wall_clearance", cfg.room.wall_clearance, "room");
    Read(r, "min_source_receiver_distance", cfg.room.min_source_receiver_distance, "room");
    Read(r, "max_attempts", cfg.room.max_attempts, "room");
  }
  if (j.contains("overlap")) {
    const json& o = j.at("overlap");
    CheckKeys(o, {"p_overlap", "pause_median", "pause_sigma", "overlap_mean", "turn_median",
                  "turn_sigma", "min_turn"},
              "overlap");
    Read(o, "p_overlap", cfg.overlap.p_overlap, "overlap");
    Read(o, "pause_median", cfg.overlap.pause_median, "overlap");
    Read(o, "pause_sigma", cfg.overlap.pause_sigma, "overlap");
    Read(o, "overlap_mean", cfg.overlap.overlap_mean, "overlap");
    Read(o, "turn_median", cfg.overlap.turn_median, "overlap");
    Read(o, "turn_sigma", cfg.overlap.turn_sigma, "overlap");
    Read(o, "min_turn", cfg.overlap.min_turn, "overlap");
  }
  if (j.contains("oracle_features")) {
    const json& o = j.at("oracle_features");
    CheckKeys(o, {"enabled", "dim", "frame_step", "spread_ratio", "activity_step",
                  "activity_noise", "vad_sources", "variants"},
              "oracle_features");
    cfg.oracle.enabled = true;
    Read(o, "enabled", cfg.oracle.enabled, "oracle_features");
    Read(o, "dim", cfg.oracle.embeddings.dim, "oracle_features");
    Read(o, "frame_step", cfg.oracle.embeddings.frame_step, "oracle_features");
    Read(o, "spread_ratio", cfg.oracle.embeddings.spread_ratio, "oracle_features");
    Read(o, "activity_step", cfg.oracle.activity_step, "oracle_features");
    Read(o, "activity_noise", cfg.oracle.activity_noise, "oracle_features");
    Read(o, "vad_sources", cfg.oracle.vad_sources, "oracle_features");
    Read(o, "variants", cfg.oracle.variants, "oracle_features");
  }
  cfg.Validate();
  return cfg;
}

json SimulationConfigToJson(const SimulationConfig& cfg) {
  return {
      {"session_id", cfg.session_id},
      {"sample_rate", cfg.sample_rate},
      {"duration", cfg.duration},
      {"speakers", cfg.speakers},
      {"channels", cfg.channels},
      {"snr_db", std::isfinite(cfg.snr_db) ? json(cfg.snr_db) : json(nullptr)},
      {"room",
       {{"min_dimensions", Vec3Json(cfg.room.min_dimensions)},
        {"max_dimensions", Vec3Json(cfg.room.max_dimensions)},
        {"min_t60", cfg.room.min_t60},
        {"max_t60", cfg.room.max_t60},
        {"num_sources", cfg.room.num_sources},
        {"num_receivers", cfg.room.num_receivers},
        {"wall_clearance", cfg.room.wall_clearance},
        {"min_source_receiver_distance", cfg.room.min_source_receiver_distance},
        {"max_attempts", cfg.room.max_attempts}}},
      {"overlap",
       {{"p_overlap", cfg.overlap.p_overlap},
        {"pause_median", cfg.overlap.pause_median},
        {"pause_sigma", cfg.overlap.pause_sigma},
        {"overlap_mean", cfg.overlap.overlap_mean},
        {"turn_median", cfg.overlap.turn_median},
        {"turn_sigma", cfg.overlap.turn_sigma},
        {"min_turn", cfg.overlap.min_turn}}},
      {"oracle_features",
       {{"enabled", cfg.oracle.enabled},
        {"dim", cfg.oracle.embeddings.dim},
        {"frame_step", cfg.oracle.embeddings.frame_step},
        {"spread_ratio", cfg.oracle.embeddings.spread_ratio},
        {"activity_step", cfg.oracle.activity_step},
        {"activity_noise", cfg.oracle.activity_noise},
        {"vad_sources", cfg.oracle.vad_sources},
        {"variants", cfg.oracle.variants}}},
  };
}

std::vector<DryCorpusEntry> LoadDryCorpus(const fs::path& path) {
  json j;
  try {
    j = json::parse(ReadText(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("dry corpus " + path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw ConfigError("dry corpus: expected an array");
  std::vector<DryCorpusEntry> corpus;
  for (const auto& e : j) {
    if (!e.contains("path") || !e.contains("speaker")) {
      throw ConfigError("dry corpus entries need 'path' and 'speaker'");
    }
    fs::path p = e.at("path").get<std::string>();
    if (p.is_relative()) p = path.parent_path() / p;
    corpus.push_back({p, e.at("speaker").get<std::string>()});
  }
  return corpus;
}

void SimulateSession(const SimulationConfig& cfg, const std::vector<DryCorpusEntry>& corpus,
                     std::uint64_t seed, const fs::path& out_dir) {
  cfg.Validate();
  fs::create_directories(out_dir);
  simulate::RoomRanges ranges = cfg.room;
  const simulate::RoomSpec room = simulate::SampleRoom(ranges, seed);
  const auto schedule =
      simulate::SampleConversation(cfg.overlap, cfg.speakers, cfg.duration, seed + 1);

  // Speaker names and their dry material.
  std::vector<std::string> names;
  std::map<std::string, std::vector<Eigen::VectorXd>> clips;
  if (corpus.empty()) {
    for (int s = 0; s < cfg.speakers; ++s) names.push_back(fmt::format("spk{}", s));
  } else {
    std::vector<std::string> available;
    for (const auto& e : corpus) {
      if (std::find(available.begin(), available.end(), e.speaker) == available.end()) {
        available.push_back(e.speaker);
      }
    }
    if (static_cast<int>(available.size()) < cfg.speakers) {
      throw DataError(fmt::format("dry corpus has {} speakers, {} requested",
                                  available.size(), cfg.speakers));
    }
    names.assign(available.begin(), available.begin() + cfg.speakers);
    for (const auto& e : corpus) {
      if (std::find(names.begin(), names.end(), e.speaker) == names.end()) continue;
      MultichannelAudio a = ReadWav(e.path);
      if (a.sample_rate != cfg.sample_rate) {
        throw DataError(e.path.string() + ": sample rate differs from the simulation");
      }
      clips[e.speaker].push_back(a.samples.row(0).transpose());
    }
  }

  simulate::MixtureSpec spec;
  spec.session_id = cfg.session_id;
  spec.speakers = names;
  spec.duration = cfg.duration;
  spec.channels = cfg.channels;
  spec.sample_rate = cfg.sample_rate;
  simulate::DryStore store;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& turn = schedule[i];
    const std::string& name = names[turn.speaker];
    std::mt19937_64 rng = simulate::TaskRng(seed, i + 2);
    Eigen::VectorXd dry;
    const auto n = static_cast<Eigen::Index>(std::llround(turn.duration * cfg.sample_rate));
    if (corpus.empty()) {
      dry = simulate::SpeechLikeSignal(turn.duration, cfg.sample_rate, rng);
    } else {
      const auto& pool = clips[name];
      const Eigen::VectorXd& clip =
          pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      dry = clip.head(std::min(n, clip.size()));
    }
    if (dry.size() == 0) continue;
    const std::string id = fmt::format("u{}", i);
    store[id] = dry;
    spec.utterances.push_back({name, id, turn.start});
  }
  if (std::isfinite(cfg.snr_db)) {
    std::mt19937_64 rng = simulate::TaskRng(seed, 0);
    std::normal_distribution<double> normal;
    Eigen::VectorXd noise(static_cast<Eigen::Index>(std::llround(cfg.duration * cfg.sample_rate)));
    for (auto& v : noise) v = normal(rng);
    store["noise"] = noise;
    spec.noise = simulate::NoiseSpec{"noise", cfg.snr_db, std::nullopt};
  }

  simulate::MixtureResult mix = simulate::SimulateMixture(spec, room, store);
  // Keep the mixture within full scale; images share the factor.
  const double peak = mix.mixture.samples.cwiseAbs().maxCoeff();
  const double scale = peak > 0.9 ? 0.9 / peak : 1.0;

  AtomicWrite(out_dir / "mixture.wav", [&](const fs::path& tmp) {
    WriteWav(tmp, MultichannelAudio(scale * mix.mixture.samples, cfg.sample_rate));
  });
  Segmentation reference = mix.reference;
  AtomicWrite(out_dir / "reference.rttm",
              [&](const fs::path& tmp) { WriteRttmFile(tmp, reference); });

  json manifest_session;
  manifest_session["session_id"] = cfg.session_id;
  manifest_session["sample_rate"] = cfg.sample_rate;
  manifest_session["audio"] = {"mixture.wav"};
  manifest_session["reference_rttm"] = "reference.rttm";
  manifest_session["speaker_images"] = json::object();
  for (const auto& name : names) {
    const std::string file = "image_" + name + ".wav";
    AtomicWrite(out_dir / file, [&](const fs::path& tmp) {
      WriteWav(tmp, MultichannelAudio(scale * mix.speaker_images[name].samples, cfg.sample_rate));
    });
    manifest_session["speaker_images"][name] = file;
  }

  if (cfg.oracle.enabled) {
    manifest_session["embeddings"] = json::array();
    manifest_session["activities"] = json::array();
    const Eigen::MatrixXd centroids =
        simulate::RandomCentroids(cfg.speakers, cfg.oracle.embeddings.dim, seed + 7);
    const int frames = static_cast<int>(std::ceil(cfg.duration / cfg.oracle.activity_step));
    std::uint64_t task = 1000;
    for (int c = 0; c < cfg.channels; ++c) {
      for (const auto& vad : cfg.oracle.vad_sources) {
        for (const auto& variant : cfg.oracle.variants) {
          const std::string file = fmt::format("emb_ch{}_{}_{}.emb", c, vad, variant);
          const auto set = simulate::OracleEmbeddings(reference, names, centroids,
                                                      cfg.oracle.embeddings, seed + task++);
          AtomicWrite(out_dir / file,
                      [&](const fs::path& tmp) { diarize::WriteEmbeddings(tmp, set); });
          manifest_session["embeddings"].push_back(
              {{"channel", c}, {"variant", variant}, {"vad", vad}, {"path", file}});
        }
      }
      const std::string file = fmt::format("act_ch{}.act", c);
      auto act = simulate::OracleActivity(reference, names, cfg.oracle.activity_step, frames,
                                          cfg.oracle.activity_noise, seed + task++);
      act.session_id = cfg.session_id;
      AtomicWrite(out_dir / file, [&](const fs::path& tmp) { fusion::WriteSoftActivity(tmp, act); });
      manifest_session["activities"].push_back(
          {{"channel", c}, {"model", "oracle"}, {"path", file}});
    }
  }
  AtomicWriteText(out_dir / "manifest.json",
                  json{{"sessions", {manifest_session}}}.dump(2) + "\n");

  json meta;
  meta["seed"] = seed;
  meta["config"] = SimulationConfigToJson(cfg);
  meta["room"] = {{"dimensions", Vec3Json(room.dimensions)},
                  {"t60", room.t60},
                  {"absorption", room.Absorption()},
                  {"speed_of_sound", room.speed_of_sound}};
  meta["room"]["sources"] = json::array();
  for (int s = 0; s < cfg.speakers; ++s) meta["room"]["sources"].push_back(Vec3Json(room.sources[s]));
  meta["room"]["receivers"] = json::array();
  for (int c = 0; c < cfg.channels; ++c) meta["room"]["receivers"].push_back(Vec3Json(room.receivers[c]));
  meta["speakers"] = names;
  meta["snr_db"] = std::isfinite(cfg.snr_db) ? json(cfg.snr_db) : json(nullptr);
  meta["noise_gain"] = mix.noise_gain * scale;
  meta["output_scale"] = scale;
  AtomicWriteText(out_dir / "metadata.json", meta.dump(2) + "\n");
  Logger()->info("simulate [{}]: {} turns over {:.1f} s in a {:.1f}x{:.1f}x{:.1f} m room",
                 cfg.session_id, reference.turns.size(), cfg.duration, room.dimensions.x(),
                 room.dimensions.y(), room.dimensions.z());
}

}  // namespace farfield::pipeline
