#include "farfield/pipeline/config.h"

#include <fstream>
#include <set>

#include "farfield/core/errors.h"

namespace farfield::pipeline {
namespace {

using nlohmann::json;

// Reads one JSON object, tracking which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(Where() + ": expected an object");
  }

  template <typename T>
  void Get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(Where(key) + ": wrong type (" + j_.at(key).dump() + ")");
    }
  }

  template <typename T>
  void GetOptional(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    T value{};
    Get(key, value);
    out = value;
  }

  template <typename Fn>
  void Object(const std::string& key, Fn&& fn) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    ObjectReader sub(j_.at(key), Where(key));
    fn(sub);
    sub.Finish();
  }

  template <typename E>
  void Enum(const std::string& key, E& out,
            const std::vector<std::pair<std::string, E>>& names) {
    std::string name;
    bool present = j_.contains(key);
    Get(key, name);
    if (!present) return;
    for (const auto& [n, v] : names) {
      if (n == name) {
        out = v;
        return;
      }
    }
    throw ConfigError(Where(key) + ": unknown value '" + name + "'");
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(Where(key) + ": unknown key");
    }
  }

 private:
  std::string Where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::vector<std::pair<std::string, Window>> kWindows{
    {"hann", Window::kHann}, {"sqrt_hann", Window::kSqrtHann}};
const std::vector<std::pair<std::string, Padding>> kPaddings{
    {"none", Padding::kNone}, {"center", Padding::kCenter}};
const std::vector<std::pair<std::string, diarize::Reduction>> kReductions{
    {"linear", diarize::Reduction::kLinear},
    {"external", diarize::Reduction::kExternal}};

template <typename E>
std::string NameOf(E value, const std::vector<std::pair<std::string, E>>& names) {
  for (const auto& [n, v] : names) {
    if (v == value) return n;
  }
  return "";
}

void ReadStft(ObjectReader& r, StftParams& p) {
  r.Get("frame_length", p.frame_length);
  r.Get("frame_shift", p.frame_shift);
  r.Enum("window", p.window, kWindows);
  r.Enum("padding", p.padding, kPaddings);
}

json StftJson(const StftParams& p) {
  return {{"frame_length", p.frame_length},
          {"frame_shift", p.frame_shift},
          {"window", NameOf(p.window, kWindows)},
          {"padding", NameOf(p.padding, kPaddings)}};
}

void ReadWpe(ObjectReader& r, preprocess::WpeConfig& w) {
  r.Get("taps", w.taps);
  r.Get("delay", w.delay);
  r.Get("iterations", w.iterations);
  r.Get("block_seconds", w.block_seconds);
  r.Get("diagonal_loading", w.diagonal_loading);
}

json WpeJson(const preprocess::WpeConfig& w) {
  return {{"taps", w.taps},
          {"delay", w.delay},
          {"iterations", w.iterations},
          {"block_seconds", w.block_seconds},
          {"diagonal_loading", w.diagonal_loading}};
}

}  // namespace

void PipelineConfig::Validate() const {
  try {
    preprocess.clip.Validate();
    preprocess.wpe.Validate();
    preprocess.stft.Validate();
    diarize.cluster.Validate();
    gss.gss.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(preprocess.channel_fraction > 0.0 && preprocess.channel_fraction <= 1.0)) {
    throw ConfigError("preprocess.channel_fraction must lie in (0, 1]");
  }
  const auto& rank = preprocess.ranking;
  if (rank.num_bands < 1 || !(rank.min_hz >= 0.0) || !(rank.max_hz > rank.min_hz) ||
      rank.frame_length < 2 || rank.frame_shift < 1) {
    throw ConfigError("preprocess.ranking is invalid");
  }
  if (diarize.vad_sources.empty() || diarize.variants.empty() ||
      diarize.thr_values.empty()) {
    throw ConfigError("diarize grid axes must be non-empty");
  }
  for (double thr : diarize.thr_values) {
    if (!(thr >= 1.0)) throw ConfigError("diarize.thr_values must be >= 1");
  }
  if (!(fusion.binarize_threshold > 0.0 && fusion.binarize_threshold < 1.0)) {
    throw ConfigError("fusion.binarize_threshold must lie in (0, 1)");
  }
  for (const auto& [channel, weight] : fusion.channel_weights) {
    if (!(weight > 0.0)) throw ConfigError("fusion.channel_weights must be positive");
  }
  if (!(score.collar >= 0.0)) throw ConfigError("score.collar must be non-negative");
}

PipelineConfig ConfigFromJson(const json& j) {
  PipelineConfig cfg;
  ObjectReader root(j, "");
  root.Get("seed", cfg.seed);
  root.Object("preprocess", [&](ObjectReader& r) {
    auto& p = cfg.preprocess;
    r.Get("clip_percentile", p.clip.percentile);
    r.Get("target_peak", p.clip.target_peak);
    r.Get("wpe_enabled", p.wpe_enabled);
    r.Object("wpe", [&](ObjectReader& w) { ReadWpe(w, p.wpe); });
    r.Object("stft", [&](ObjectReader& s) { ReadStft(s, p.stft); });
    r.Object("ranking", [&](ObjectReader& s) {
      s.Get("num_bands", p.ranking.num_bands);
      s.Get("min_hz", p.ranking.min_hz);
      s.Get("max_hz", p.ranking.max_hz);
      s.Get("frame_length", p.ranking.frame_length);
      s.Get("frame_shift", p.ranking.frame_shift);
    });
    r.Get("channel_fraction", p.channel_fraction);
  });
  root.Object("diarize", [&](ObjectReader& r) {
    auto& d = cfg.diarize;
    r.Get("merge_cos_threshold", d.cluster.merge_cos_threshold);
    r.Get("max_clusters", d.cluster.max_clusters);
    r.Get("reduced_dim", d.cluster.reduced_dim);
    r.Get("frame_step", d.cluster.frame_step);
    r.Get("single_speaker_threshold", d.cluster.single_speaker_threshold);
    r.Get("max_em_iterations", d.cluster.max_em_iterations);
    r.Get("em_tolerance", d.cluster.em_tolerance);
    r.Enum("reduction", d.reduction, kReductions);
    r.Get("vad_sources", d.vad_sources);
    r.Get("variants", d.variants);
    r.Get("thr_values", d.thr_values);
  });
  root.Object("fusion", [&](ObjectReader& r) {
    r.Get("binarize_threshold", cfg.fusion.binarize_threshold);
    std::map<std::string, double> weights;
    r.Get("channel_weights", weights);
    for (const auto& [key, w] : weights) {
      try {
        std::size_t used = 0;
        const int channel = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
        cfg.fusion.channel_weights[channel] = w;
      } catch (const std::exception&) {
        throw ConfigError("fusion.channel_weights: '" + key + "' is not a channel index");
      }
    }
  });
  root.Object("gss", [&](ObjectReader& r) {
    auto& g = cfg.gss.gss;
    r.Get("enabled", cfg.gss.enabled);
    r.Get("iterations", g.iterations);
    r.Get("context_margin", g.context_margin);
    r.GetOptional("chunk_frames", g.chunk_frames);
    r.Get("add_noise_source", g.add_noise_source);
    r.Get("noise_floor", g.noise_floor);
    r.Get("reestimate_priors", g.reestimate_priors);
    r.Get("wpe_enabled", g.wpe_enabled);
    r.Object("wpe", [&](ObjectReader& w) { ReadWpe(w, g.wpe); });
    r.Object("stft", [&](ObjectReader& s) { ReadStft(s, g.stft); });
  });
  root.Object("score", [&](ObjectReader& r) { r.Get("collar", cfg.score.collar); });
  root.Finish();
  cfg.Validate();
  return cfg;
}

json ConfigToJson(const PipelineConfig& cfg) {
  const auto& p = cfg.preprocess;
  const auto& d = cfg.diarize;
  const auto& g = cfg.gss.gss;
  json weights = json::object();
  for (const auto& [channel, w] : cfg.fusion.channel_weights) {
    weights[std::to_string(channel)] = w;
  }
  return {
      {"seed", cfg.seed},
      {"preprocess",
       {{"clip_percentile", p.clip.percentile},
        {"target_peak", p.clip.target_peak},
        {"wpe_enabled", p.wpe_enabled},
        {"wpe", WpeJson(p.wpe)},
        {"stft", StftJson(p.stft)},
        {"ranking",
         {{"num_bands", p.ranking.num_bands},
          {"min_hz", p.ranking.min_hz},
          {"max_hz", p.ranking.max_hz},
          {"frame_length", p.ranking.frame_length},
          {"frame_shift", p.ranking.frame_shift}}},
        {"channel_fraction", p.channel_fraction}}},
      {"diarize",
       {{"merge_cos_threshold", d.cluster.merge_cos_threshold},
        {"max_clusters", d.cluster.max_clusters},
        {"reduced_dim", d.cluster.reduced_dim},
        {"frame_step", d.cluster.frame_step},
        {"single_speaker_threshold", d.cluster.single_speaker_threshold},
        {"max_em_iterations", d.cluster.max_em_iterations},
        {"em_tolerance", d.cluster.em_tolerance},
        {"reduction", NameOf(d.reduction, kReductions)},
        {"vad_sources", d.vad_sources},
        {"variants", d.variants},
        {"thr_values", d.thr_values}}},
      {"fusion",
       {{"binarize_threshold", cfg.fusion.binarize_threshold},
        {"channel_weights", weights}}},
      {"gss",
       {{"enabled", cfg.gss.enabled},
        {"iterations", g.iterations},
        {"context_margin", g.context_margin},
        {"chunk_frames", g.chunk_frames ? json(*g.chunk_frames) : json(nullptr)},
        {"add_noise_source", g.add_noise_source},
        {"noise_floor", g.noise_floor},
        {"reestimate_priors", g.reestimate_priors},
        {"wpe_enabled", g.wpe_enabled},
        {"wpe", WpeJson(g.wpe)},
        {"stft", StftJson(g.stft)}}},
      {"score", {{"collar", cfg.score.collar}}},
  };
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return ConfigFromJson(j);
}

}  // namespace farfield::pipeline
