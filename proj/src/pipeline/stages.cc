#include "farfield/pipeline/stages.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "farfield/core/errors.h"
#include "farfield/core/logging.h"
#include "farfield/core/wav_io.h"
#include "farfield/diarize/diarizer.h"
#include "farfield/fusion/doverlap.h"
#include "farfield/fusion/segment_ops.h"
#include "farfield/fusion/soft_fusion.h"
#include "farfield/gss/extract.h"
#include "farfield/metrics/si_sdr.h"
#include "farfield/pipeline/artifacts.h"
#include "farfield/preprocess/channel_rank.h"
#include "farfield/preprocess/clip_normalize.h"
#include "farfield/preprocess/wpe.h"

namespace farfield::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Rethrows with the stage and session prepended, keeping the error class.
template <typename Fn>
auto WithStage(const std::string& stage, const std::string& session, Fn&& fn) {
  const std::string where = stage + " [" + session + "]: ";
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(where + e.what());
  }
}

std::string ChannelDir(int channel) { return fmt::format("ch{}", channel); }

std::string CellName(const std::string& vad, const std::string& variant, double thr) {
  return fmt::format("{}_{}_thr{:g}", vad, variant, thr);
}

void WriteRttmAtomic(const fs::path& path, const Segmentation& seg) {
  AtomicWrite(path, [&](const fs::path& tmp) { WriteRttmFile(tmp, seg); });
}

Segmentation ReadSingleRttm(const fs::path& path, const std::string& session_id) {
  auto all = ReadRttmFile(path);
  if (auto it = all.find(session_id); it != all.end()) return it->second;
  if (all.empty()) return Segmentation{session_id, {}};
  if (all.size() == 1) {
    Segmentation seg = all.begin()->second;
    seg.session_id = session_id;
    return seg;
  }
  throw DataError(path.string() + " has no session '" + session_id + "'");
}

}  // namespace

PreprocessOutput RunPreprocess(const SessionManifest& session, const RunContext& ctx) {
  return WithStage("preprocess", session.session_id, [&] {
    session.CheckFiles();
    const auto& cfg = ctx.config.preprocess;
    std::string material = "preprocess\n" + ConfigToJson(ctx.config)["preprocess"].dump() + "\n";
    for (const auto& p : session.audio) material += Sha256File(p) + "\n";
    StageCache cache(ctx.run_dir / "preprocess" / session.session_id, Sha256Hex(material));

    PreprocessOutput out;
    out.dir = cache.dir();
    const std::vector<std::string> outputs{"orig.wav", "wpe.wav", "report.json"};
    if (cache.Hit(outputs)) {
      const json report = json::parse(ReadText(cache.dir() / "report.json"));
      out.selected = report.at("selected").get<std::vector<int>>();
      for (const auto& c : report.at("channels")) out.scores.push_back(c.at("score").get<double>());
      out.cache_hit = true;
      Logger()->info("preprocess [{}]: cache hit", session.session_id);
      return out;
    }
    cache.Prepare();

    MultichannelAudio audio = ReadWavChannels(session.audio);
    audio.Validate();
    if (audio.sample_rate != session.sample_rate) {
      throw DataError(fmt::format("sample rate {} differs from the manifest's {}",
                                  audio.sample_rate, session.sample_rate));
    }
    const MultichannelAudio normalized = preprocess::ClipNormalize(audio, cfg.clip);
    MultichannelAudio dereverbed = normalized;
    if (cfg.wpe_enabled) {
      const SpectralTensor spec = Stft(normalized, cfg.stft);
      dereverbed = Istft(preprocess::WpeDereverberate(spec, cfg.wpe), cfg.stft);
    }
    const auto ranking = preprocess::EnvelopeVarianceRank(dereverbed, cfg.ranking);
    out.selected = preprocess::SelectTopChannels(ranking, cfg.channel_fraction);
    out.scores = ranking.scores;

    AtomicWrite(cache.dir() / "orig.wav", [&](const fs::path& tmp) {
      WriteWav(tmp, normalized.SelectChannels(out.selected));
    });
    AtomicWrite(cache.dir() / "wpe.wav", [&](const fs::path& tmp) {
      WriteWav(tmp, dereverbed.SelectChannels(out.selected));
    });
    json report;
    report["session_id"] = session.session_id;
    report["selected"] = out.selected;
    report["channels"] = json::array();
    for (int c = 0; c < audio.channels(); ++c) {
      const auto rank = std::find(ranking.order.begin(), ranking.order.end(), c) -
                        ranking.order.begin();
      report["channels"].push_back(
          {{"channel", c}, {"score", ranking.scores[c]}, {"rank", rank}});
    }
    AtomicWriteText(cache.dir() / "report.json", report.dump(2) + "\n");
    cache.Commit();
    Logger()->info("preprocess [{}]: selected {} of {} channels", session.session_id,
                   out.selected.size(), audio.channels());
    return out;
  });
}

GridOutput RunDiarizeGrid(const SessionManifest& session, const RunContext& ctx,
                          const std::vector<int>& channels) {
  return WithStage("diarize", session.session_id, [&] {
    const auto& cfg = ctx.config.diarize;
    auto find_ref = [&](int channel, const std::string& variant,
                        const std::string& vad) -> const EmbeddingRef* {
      for (const auto& e : session.embeddings) {
        if (e.channel == channel && e.variant == variant && e.vad == vad) return &e;
      }
      return nullptr;
    };

    std::string material = "diarize\n" + ConfigToJson(ctx.config)["diarize"].dump() +
                           fmt::format("\nseed {}\n", ctx.config.seed);
    for (int c : channels) {
      material += fmt::format("channel {}\n", c);
      for (const auto& vad : cfg.vad_sources) {
        for (const auto& variant : cfg.variants) {
          if (const auto* ref = find_ref(c, variant, vad)) {
            material += vad + "/" + variant + " " + Sha256File(ref->path) + "\n";
          }
        }
      }
    }
    StageCache cache(ctx.run_dir / "diarize" / session.session_id, Sha256Hex(material));

    GridOutput out;
    if (cache.Hit({"grid.json"})) {
      const json grid = json::parse(ReadText(cache.dir() / "grid.json"));
      for (const auto& [key, cells] : grid.items()) {
        const int c = std::stoi(key);
        const fs::path dir = cache.dir() / ChannelDir(c);
        for (const auto& name : cells) {
          out.cells[c].push_back(
              ReadSingleRttm(dir / (name.get<std::string>() + ".rttm"), session.session_id));
        }
        out.fused[c] = ReadSingleRttm(dir / "fused.rttm", session.session_id);
      }
      out.cache_hit = true;
      Logger()->info("diarize [{}]: cache hit", session.session_id);
      return out;
    }
    cache.Prepare();

    std::vector<std::vector<std::string>> names(channels.size());
    std::vector<std::vector<Segmentation>> cells(channels.size());
    std::vector<std::optional<Segmentation>> fused(channels.size());
    ParallelFor(static_cast<int>(channels.size()), ctx.workers, [&](int i) {
      const int c = channels[i];
      const fs::path dir = cache.dir() / ChannelDir(c);
      for (const auto& vad : cfg.vad_sources) {
        for (const auto& variant : cfg.variants) {
          const auto* ref = find_ref(c, variant, vad);
          if (!ref) {
            Logger()->warn("diarize [{}]: no embeddings for channel {} {}/{}; cell skipped",
                           session.session_id, c, vad, variant);
            continue;
          }
          const diarize::EmbeddingSet emb = diarize::ReadEmbeddings(ref->path);
          for (double thr : cfg.thr_values) {
            diarize::DiarizeConfig local = cfg.cluster;
            local.reject_thr = thr;
            diarize::DiarizeOptions options;
            options.reduction = cfg.reduction;
            options.seed = ctx.config.seed;
            Segmentation seg = diarize::Diarize(emb, local, options).segmentation;
            seg.session_id = session.session_id;
            const std::string name = CellName(vad, variant, thr);
            WriteRttmAtomic(dir / (name + ".rttm"), seg);
            names[i].push_back(name);
            cells[i].push_back(std::move(seg));
          }
        }
      }
      if (cells[i].empty()) return;
      Segmentation f = fusion::DoverlapFuse({cells[i], {}});
      f.session_id = session.session_id;
      WriteRttmAtomic(dir / "fused.rttm", f);
      fused[i] = std::move(f);
    });

    json grid = json::object();
    for (std::size_t i = 0; i < channels.size(); ++i) {
      if (!fused[i]) continue;
      grid[std::to_string(channels[i])] = names[i];
      out.cells[channels[i]] = std::move(cells[i]);
      out.fused[channels[i]] = std::move(*fused[i]);
    }
    if (out.fused.empty()) throw DataError("no embeddings for any selected channel");
    AtomicWriteText(cache.dir() / "grid.json", grid.dump(2) + "\n");
    cache.Commit();
    return out;
  });
}

namespace {

struct SegmentOutput {
  Turn turn;
  gss::ExtractionResult result;
};

SessionReport RunSession(const SessionManifest& session, const RunContext& ctx) {
  const PipelineConfig& cfg = ctx.config;
  SessionReport report;
  report.session_id = session.session_id;

  const PreprocessOutput pre = RunPreprocess(session, ctx);
  const GridOutput grid = RunDiarizeGrid(session, ctx, pre.selected);
  const double duration = ReadWav(pre.dir / "orig.wav").duration();

  // Per-channel soft fusion of the neural activities against the fused
  // clustering result, then cross-channel hard fusion.
  const fs::path fusion_dir = ctx.run_dir / "fusion" / session.session_id;
  std::vector<int> fused_channels;
  std::vector<fusion::SoftActivity> soft;
  fusion::FusionInput cross;
  WithStage("fusion", session.session_id, [&] {
    fs::create_directories(fusion_dir);
    for (const auto& [channel, seg] : grid.fused) {
      std::vector<fusion::SoftActivity> acts;
      for (const auto& a : session.activities) {
        if (a.channel == channel) acts.push_back(fusion::ReadSoftActivity(a.path));
      }
      fusion::SoftActivity fused;
      if (acts.empty()) {
        const double step = 0.01;
        fused = fusion::Rasterize(seg, seg.Speakers(), step,
                                  static_cast<int>(std::ceil(duration / step)));
        fused.source_tag = "clustering";
      } else {
        fused = fusion::SoftFuse(acts, seg).fused;
      }
      fused.session_id = session.session_id;
      fusion::WriteSoftActivity(fusion_dir / (ChannelDir(channel) + ".act"), fused);
      Segmentation hard = fusion::Binarize(fused, cfg.fusion.binarize_threshold);
      hard.session_id = session.session_id;
      WriteRttmAtomic(fusion_dir / (ChannelDir(channel) + ".rttm"), hard);
      fused_channels.push_back(channel);
      soft.push_back(std::move(fused));
      cross.hypotheses.push_back(std::move(hard));
      auto w = cfg.fusion.channel_weights.find(channel);
      cross.weights.push_back(w == cfg.fusion.channel_weights.end() ? 1.0 : w->second);
    }
    return 0;
  });

  const fusion::LabelMapping mapping = fusion::MapLabels(cross);
  Segmentation final_seg = fusion::VoteMapped(mapping.mapped, cross.weights,
                                              mapping.labels, session.session_id);
  WriteRttmAtomic(fusion_dir / "final.rttm", final_seg);
  const std::vector<std::string> speakers = final_seg.Speakers();
  report.num_speakers = static_cast<int>(speakers.size());

  // Soft activity of every final speaker: mean over the channels that carry
  // the label, or the rasterized final turns when none does.
  const double step = soft.front().frame_step;
  const int frames = soft.front().frames();
  fusion::SoftActivity final_act =
      fusion::Rasterize(final_seg, speakers, step, frames);
  final_act.session_id = session.session_id;
  final_act.source_tag = "final";
  for (std::size_t s = 0; s < speakers.size(); ++s) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(frames);
    int count = 0;
    for (std::size_t h = 0; h < soft.size(); ++h) {
      if (soft[h].frames() != frames || soft[h].frame_step != step) continue;
      for (int r = 0; r < soft[h].speakers(); ++r) {
        auto it = mapping.renames[h].find(soft[h].Label(r));
        if (it != mapping.renames[h].end() && it->second == speakers[s]) {
          sum += soft[h].probs.row(r);
          ++count;
        }
      }
    }
    if (count > 0) final_act.probs.row(static_cast<Eigen::Index>(s)) = sum / count;
  }
  fusion::WriteSoftActivity(fusion_dir / "final.act", final_act);

  const fs::path gss_dir = ctx.run_dir / "gss" / session.session_id;
  fs::create_directories(gss_dir);
  const double margin = cfg.gss.gss.context_margin;
  WriteRttmAtomic(gss_dir / "extended.rttm",
                  fusion::ExtendSegments(final_seg, margin, duration));

  std::vector<SegmentOutput> segments;
  MultichannelAudio audio;
  if (cfg.gss.enabled) {
    audio = ReadWav(pre.dir / "orig.wav");
    if (audio.channels() < 2) {
      Logger()->warn("gss [{}]: fewer than two channels; skipped", session.session_id);
    } else {
      Segmentation sorted = final_seg;
      sorted.Sort();
      segments.resize(sorted.turns.size());
      WithStage("gss", session.session_id, [&] {
        ParallelFor(static_cast<int>(sorted.turns.size()), ctx.workers, [&](int i) {
          segments[i].turn = sorted.turns[i];
          segments[i].result =
              gss::ExtractSpeakerSegment(audio, sorted.turns[i], final_act, cfg.gss.gss);
        });
        return 0;
      });
      json listing = json::array();
      std::map<std::string, MultichannelAudio> tracks;
      for (const auto& name : speakers) {
        tracks[name] = MultichannelAudio::Zeros(1, audio.length(), audio.sample_rate);
      }
      for (const auto& seg : segments) {
        const auto& r = seg.result;
        tracks[seg.turn.speaker].samples.row(0).segment(r.start_sample, r.waveform.size()) +=
            r.waveform.transpose();
        double ll = 0.0;
        for (const auto& bin : r.log_likelihood) ll += bin.back();
        listing.push_back({{"speaker", seg.turn.speaker},
                           {"start", seg.turn.start},
                           {"end", seg.turn.end},
                           {"reference_channel", pre.selected[r.reference_channel]},
                           {"mean_log_likelihood",
                            r.log_likelihood.empty() ? 0.0 : ll / r.log_likelihood.size()}});
      }
      for (const auto& [name, track] : tracks) {
        AtomicWrite(gss_dir / (name + ".wav"),
                    [&](const fs::path& tmp) { WriteWav(tmp, track); });
      }
      AtomicWriteText(gss_dir / "segments.json", listing.dump(2) + "\n");
      report.segments = static_cast<int>(segments.size());
    }
  }

  if (session.reference_rttm) {
    WithStage("score", session.session_id, [&] {
      const Segmentation ref = ReadSingleRttm(*session.reference_rttm, session.session_id);
      report.reference_speakers = static_cast<int>(ref.NumSpeakers());
      report.der = metrics::ComputeDer(ref, final_seg, cfg.score.collar);
      std::vector<double> scores;
      for (const auto& [ref_speaker, path] : session.speaker_images) {
        auto m = report.der->mapping.find(ref_speaker);
        if (m == report.der->mapping.end()) continue;
        const MultichannelAudio image = ReadWav(path);
        for (const auto& seg : segments) {
          if (seg.turn.speaker != m->second) continue;
          const auto& r = seg.result;
          const int channel = pre.selected[r.reference_channel];
          if (channel >= image.channels() ||
              r.start_sample + r.waveform.size() > image.length()) {
            continue;
          }
          const Eigen::VectorXd target =
              image.samples.row(channel).segment(r.start_sample, r.waveform.size()).transpose();
          if (target.squaredNorm() <= 0.0) continue;
          scores.push_back(metrics::SiSdr(
              std::span<const double>(r.waveform.data(), r.waveform.size()),
              std::span<const double>(target.data(), target.size())));
        }
      }
      if (!scores.empty()) {
        report.mean_si_sdr =
            std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
      }
      json j;
      j["session_id"] = session.session_id;
      j["der"] = report.der->der;
      j["missed"] = report.der->missed;
      j["false_alarm"] = report.der->false_alarm;
      j["confusion"] = report.der->confusion;
      j["total_ref"] = report.der->total_ref;
      j["reference_speakers"] = *report.reference_speakers;
      j["hypothesis_speakers"] = report.num_speakers;
      j["mean_si_sdr"] = report.mean_si_sdr ? json(*report.mean_si_sdr) : json(nullptr);
      AtomicWriteText(ctx.run_dir / "score" / session.session_id / "report.json",
                      j.dump(2) + "\n");
      return 0;
    });
  }
  return report;
}

}  // namespace

std::vector<SessionReport> RunFull(const Manifest& manifest, const RunContext& ctx) {
  ctx.config.Validate();
  if (manifest.sessions.empty()) throw ConfigError("manifest lists no sessions");
  fs::create_directories(ctx.run_dir);
  AtomicWriteText(ctx.run_dir / "config.json", ConfigToJson(ctx.config).dump(2) + "\n");
  AtomicWriteText(ctx.run_dir / "manifest.json", ManifestToJson(manifest).dump(2) + "\n");

  // Sessions share the worker budget; a single session uses it internally.
  RunContext inner = ctx;
  const int n = static_cast<int>(manifest.sessions.size());
  if (n > 1) inner.workers = 1;
  std::vector<SessionReport> reports(n);
  ParallelFor(n, n > 1 ? ctx.workers : 1,
              [&](int i) { reports[i] = RunSession(manifest.sessions[i], inner); });

  if (std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.der.has_value(); })) {
    AtomicWriteText(ctx.run_dir / "score" / "report.txt", FormatScoreTable(reports));
  }
  return reports;
}

std::vector<int> GreedyFusionSelection(const std::vector<Segmentation>& hypotheses,
                                       const Segmentation& reference, double collar) {
  std::vector<int> chosen;
  double best = std::numeric_limits<double>::infinity();
  while (chosen.size() < hypotheses.size()) {
    int pick = -1;
    double pick_der = best;
    for (int h = 0; h < static_cast<int>(hypotheses.size()); ++h) {
      if (std::find(chosen.begin(), chosen.end(), h) != chosen.end()) continue;
      fusion::FusionInput input;
      for (int c : chosen) input.hypotheses.push_back(hypotheses[c]);
      input.hypotheses.push_back(hypotheses[h]);
      const double der = metrics::ComputeDer(reference, fusion::DoverlapFuse(input), collar).der;
      if (der < pick_der) {
        pick_der = der;
        pick = h;
      }
    }
    if (pick < 0) break;
    chosen.push_back(pick);
    best = pick_der;
  }
  return chosen;
}

std::string FormatScoreTable(const std::vector<SessionReport>& reports) {
  std::ostringstream os;
  os << fmt::format("{:<24} {:>8} {:>8} {:>8} {:>8} {:>9} {:>9}\n", "session", "DER%",
                    "miss%", "fa%", "conf%", "spk ref", "spk hyp");
  double der_sum = 0.0;
  int scored = 0, matched = 0;
  for (const auto& r : reports) {
    if (!r.der) continue;
    const auto& d = *r.der;
    const double total = d.total_ref;
    os << fmt::format("{:<24} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f} {:>9} {:>9}\n", r.session_id,
                      100.0 * d.der, 100.0 * d.missed / total, 100.0 * d.false_alarm / total,
                      100.0 * d.confusion / total, r.reference_speakers.value_or(0),
                      r.num_speakers);
    der_sum += d.der;
    ++scored;
    if (r.reference_speakers == r.num_speakers) ++matched;
  }
  if (scored > 0) {
    os << fmt::format("{:<24} {:>8.2f}   count accuracy {:.3f}\n", "AVG",
                      100.0 * der_sum / scored, static_cast<double>(matched) / scored);
  }
  return os.str();
}

}  // namespace farfield::pipeline
