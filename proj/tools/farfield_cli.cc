// Command-line front end of the far-field toolkit.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "farfield/core/errors.h"
#include "farfield/core/logging.h"
#include "farfield/core/segmentation.h"
#include "farfield/core/wav_io.h"
#include "farfield/fusion/doverlap.h"
#include "farfield/fusion/soft_activity.h"
#include "farfield/gss/extract.h"
#include "farfield/metrics/der.h"
#include "farfield/pipeline/artifacts.h"
#include "farfield/pipeline/config.h"
#include "farfield/pipeline/manifest.h"
#include "farfield/pipeline/simulate_session.h"
#include "farfield/pipeline/stages.h"

namespace fs = std::filesystem;
using namespace farfield;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config;
  std::string manifest;
  std::string run_dir = "runs/default";
  int workers = 1;
  std::optional<std::uint64_t> seed;
};

void AddCommon(CLI::App* cmd, CommonOptions& o, bool needs_manifest = true) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  auto* m = cmd->add_option("--manifest", o.manifest, "JSON session manifest");
  if (needs_manifest) m->required();
  cmd->add_option("--run-dir", o.run_dir, "Run directory (runs/<run-id>)");
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Overrides the configured seed");
}

pipeline::RunContext Context(const CommonOptions& o) {
  pipeline::RunContext ctx;
  ctx.config = o.config.empty() ? pipeline::PipelineConfig{} : pipeline::LoadConfig(o.config);
  if (o.seed) ctx.config.seed = *o.seed;
  ctx.config.Validate();
  ctx.run_dir = o.run_dir;
  ctx.workers = o.workers;
  return ctx;
}

std::map<std::string, Segmentation> ReadRttmTree(const fs::path& p) {
  std::map<std::string, Segmentation> out;
  std::vector<fs::path> files;
  if (fs::is_directory(p)) {
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file() && e.path().extension() == ".rttm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    if (!fs::exists(p)) throw DataError("missing file: " + p.string());
    files.push_back(p);
  }
  for (const auto& f : files) {
    for (auto& [id, seg] : ReadRttmFile(f)) {
      auto& dst = out[id];
      dst.session_id = id;
      dst.turns.insert(dst.turns.end(), seg.turns.begin(), seg.turns.end());
    }
  }
  return out;
}

int CmdPreprocess(const CommonOptions& o) {
  const auto ctx = Context(o);
  const auto manifest = pipeline::LoadManifest(o.manifest);
  for (const auto& s : manifest.sessions) {
    const auto out = pipeline::RunPreprocess(s, ctx);
    std::cout << fmt::format("{}: {} channels selected{} -> {}\n", s.session_id,
                             out.selected.size(), out.cache_hit ? " (cached)" : "",
                             out.dir.string());
  }
  return 0;
}

int CmdDiarize(const CommonOptions& o) {
  const auto ctx = Context(o);
  const auto manifest = pipeline::LoadManifest(o.manifest);
  for (const auto& s : manifest.sessions) {
    const auto pre = pipeline::RunPreprocess(s, ctx);
    const auto grid = pipeline::RunDiarizeGrid(s, ctx, pre.selected);
    for (const auto& [channel, seg] : grid.fused) {
      std::cout << fmt::format("{} ch{}: {} hypotheses, {} speakers\n", s.session_id, channel,
                               grid.cells.at(channel).size(), seg.NumSpeakers());
    }
  }
  return 0;
}

int CmdFuse(const std::string& list, const std::string& output, const std::string& reference,
            bool greedy, double collar) {
  // {"session_id": "...", "hypotheses": [{"rttm": "...", "weight": 1.0}, ...]}
  const fs::path list_path(list);
  json j;
  try {
    j = json::parse(pipeline::ReadText(list_path));
  } catch (const json::parse_error& e) {
    throw ConfigError("fusion list: " + std::string(e.what()));
  }
  if (!j.contains("hypotheses") || !j["hypotheses"].is_array()) {
    throw ConfigError("fusion list needs a 'hypotheses' array");
  }
  const std::string session = j.value("session_id", "");
  fusion::FusionInput input;
  for (const auto& h : j["hypotheses"]) {
    fs::path p = h.at("rttm").get<std::string>();
    if (p.is_relative()) p = list_path.parent_path() / p;
    auto all = ReadRttmFile(p);
    Segmentation seg;
    if (!session.empty() && all.count(session)) {
      seg = all.at(session);
    } else if (all.size() == 1) {
      seg = all.begin()->second;
    } else if (!all.empty()) {
      throw DataError(p.string() + ": ambiguous session");
    }
    seg.session_id = session.empty() ? seg.session_id : session;
    input.hypotheses.push_back(seg);
    input.weights.push_back(h.value("weight", 1.0));
  }
  if (input.hypotheses.empty()) throw ConfigError("no hypotheses to fuse");

  if (greedy) {
    if (reference.empty()) throw ConfigError("--greedy needs --reference");
    auto refs = ReadRttmTree(reference);
    if (refs.empty()) throw DataError("empty reference");
    const Segmentation& ref =
        refs.count(input.hypotheses.front().session_id) ? refs.at(input.hypotheses.front().session_id)
                                                        : refs.begin()->second;
    const auto chosen = pipeline::GreedyFusionSelection(input.hypotheses, ref, collar);
    fusion::FusionInput subset;
    for (int c : chosen) {
      subset.hypotheses.push_back(input.hypotheses[c]);
      subset.weights.push_back(input.weights[c]);
      std::cout << "selected " << j["hypotheses"][c].at("rttm").get<std::string>() << "\n";
    }
    input = subset;
  }
  Segmentation fused = fusion::DoverlapFuse(input);
  if (!session.empty()) fused.session_id = session;
  pipeline::AtomicWrite(output, [&](const fs::path& tmp) { WriteRttmFile(tmp, fused); });
  std::cout << fmt::format("fused {} hypotheses -> {}\n", input.hypotheses.size(), output);
  return 0;
}

int CmdGss(const std::vector<std::string>& audio, const std::string& rttm,
           const std::string& activity, const CommonOptions& o) {
  const auto ctx = Context(o);
  std::vector<fs::path> paths(audio.begin(), audio.end());
  const MultichannelAudio session = ReadWavChannels(paths);
  const fusion::SoftActivity act = fusion::ReadSoftActivity(activity);
  const auto segs = ReadRttmFile(rttm);
  fs::create_directories(ctx.run_dir);
  for (const auto& [id, seg] : segs) {
    Segmentation sorted = seg;
    sorted.Sort();
    fusion::SoftActivity labeled = act;
    if (labeled.labels.empty()) {
      const auto speakers = sorted.Speakers();
      if (static_cast<int>(speakers.size()) != act.speakers()) {
        throw DataError("activity rows do not match the RTTM speakers");
      }
      labeled.labels = speakers;
    }
    int index = 0;
    for (const auto& turn : sorted.turns) {
      const auto r = gss::ExtractSpeakerSegment(session, turn, labeled, ctx.config.gss.gss);
      const fs::path out = ctx.run_dir / fmt::format("{}_{}_{:04d}.wav", id, turn.speaker, index++);
      pipeline::AtomicWrite(out, [&](const fs::path& tmp) {
        WriteWav(tmp, MultichannelAudio(r.waveform.transpose(), session.sample_rate));
      });
    }
    std::cout << fmt::format("{}: {} segments -> {}\n", id, sorted.turns.size(),
                             ctx.run_dir.string());
  }
  return 0;
}

int CmdSimulate(const CommonOptions& o) {
  pipeline::SimulationConfig cfg;
  if (!o.config.empty()) {
    json j;
    try {
      j = json::parse(pipeline::ReadText(o.config));
    } catch (const json::parse_error& e) {
      throw ConfigError("simulation config: " + std::string(e.what()));
    }
    cfg = pipeline::SimulationConfigFromJson(j);
  }
  std::vector<pipeline::DryCorpusEntry> corpus;
  if (!o.manifest.empty()) corpus = pipeline::LoadDryCorpus(o.manifest);
  pipeline::SimulateSession(cfg, corpus, o.seed.value_or(0), o.run_dir);
  std::cout << fmt::format("simulated {} -> {}\n", cfg.session_id, o.run_dir);
  return 0;
}

int CmdScore(const std::string& ref_path, const std::string& hyp_path, double collar) {
  const auto refs = ReadRttmTree(ref_path);
  const auto hyps = ReadRttmTree(hyp_path);
  std::vector<pipeline::SessionReport> reports;
  for (const auto& [id, ref] : refs) {
    pipeline::SessionReport r;
    r.session_id = id;
    auto it = hyps.find(id);
    const Segmentation hyp = it == hyps.end() ? Segmentation{id, {}} : it->second;
    r.reference_speakers = static_cast<int>(ref.NumSpeakers());
    r.num_speakers = static_cast<int>(hyp.NumSpeakers());
    r.der = metrics::ComputeDer(ref, hyp, collar);
    reports.push_back(std::move(r));
  }
  std::cout << pipeline::FormatScoreTable(reports);
  return 0;
}

int CmdRun(const CommonOptions& o) {
  const auto ctx = Context(o);
  const auto manifest = pipeline::LoadManifest(o.manifest);
  const auto reports = pipeline::RunFull(manifest, ctx);
  for (const auto& r : reports) {
    std::cout << fmt::format("{}: {} speakers, {} enhanced segments", r.session_id,
                             r.num_speakers, r.segments);
    if (r.der) std::cout << fmt::format(", DER {:.2f}%", 100.0 * r.der->der);
    if (r.mean_si_sdr) std::cout << fmt::format(", SI-SDR {:.2f} dB", *r.mean_si_sdr);
    std::cout << "\n";
  }
  if (std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.der.has_value(); })) {
    std::cout << pipeline::FormatScoreTable(reports);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multichannel far-field speech toolkit"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  CommonOptions pre, dia, gss_opts, sim, run;
  AddCommon(app.add_subcommand("preprocess", "Normalize, dereverberate and rank channels"), pre);
  AddCommon(app.add_subcommand("diarize", "Clustering diarization grid with per-channel fusion"),
            dia);
  AddCommon(app.add_subcommand("run", "Full pipeline with scoring"), run);

  auto* fuse = app.add_subcommand("fuse", "DOVER-Lap fusion of RTTM hypotheses");
  std::string fuse_list, fuse_out = "fused.rttm", fuse_ref;
  bool greedy = false;
  double fuse_collar = 0.0;
  fuse->add_option("--manifest", fuse_list, "JSON list of hypotheses and weights")->required();
  fuse->add_option("--output", fuse_out, "Output RTTM");
  fuse->add_option("--reference", fuse_ref, "Reference RTTM for --greedy");
  fuse->add_flag("--greedy", greedy, "Forward-select hypotheses by DER");
  fuse->add_option("--collar", fuse_collar, "Scoring collar in seconds");

  auto* gss_cmd = app.add_subcommand("gss", "Guided source separation of RTTM segments");
  std::vector<std::string> gss_audio;
  std::string gss_rttm, gss_act;
  gss_cmd->add_option("--audio", gss_audio, "Session WAV file(s)")->required();
  gss_cmd->add_option("--rttm", gss_rttm, "Segments to extract")->required();
  gss_cmd->add_option("--activity", gss_act, "Soft speaker activity (ACT1)")->required();
  AddCommon(gss_cmd, gss_opts, false);

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a reverberant meeting session");
  AddCommon(sim_cmd, sim, false);

  auto* score = app.add_subcommand("score", "DER and speaker-count accuracy");
  std::string ref_path, hyp_path;
  double collar = 0.0;
  score->add_option("--ref", ref_path, "Reference RTTM file or directory")->required();
  score->add_option("--hyp", hyp_path, "Hypothesis RTTM file or directory")->required();
  score->add_option("--collar", collar, "Collar in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  Logger()->set_level(spdlog::level::from_str(log_level));

  try {
    if (app.got_subcommand("preprocess")) return CmdPreprocess(pre);
    if (app.got_subcommand("diarize")) return CmdDiarize(dia);
    if (app.got_subcommand("fuse")) return CmdFuse(fuse_list, fuse_out, fuse_ref, greedy, fuse_collar);
    if (app.got_subcommand("gss")) return CmdGss(gss_audio, gss_rttm, gss_act, gss_opts);
    if (app.got_subcommand("simulate")) return CmdSimulate(sim);
    if (app.got_subcommand("score")) return CmdScore(ref_path, hyp_path, collar);
    if (app.got_subcommand("run")) return CmdRun(run);
  } catch (const ConfigError& e) {
    Logger()->error("{}", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    Logger()->error("{}", e.what());
    return 2;
  } catch (const DataError& e) {
    Logger()->error("{}", e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    Logger()->error("{}", e.what());
    return 3;
  } catch (const NumericalError& e) {
    Logger()->error("{}", e.what());
    return 4;
  } catch (const std::exception& e) {
    Logger()->error("unexpected failure: {}", e.what());
    return 1;
  }
  return 0;
}
