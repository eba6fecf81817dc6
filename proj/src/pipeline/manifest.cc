#include "farfield/pipeline/manifest.h"

#include <fstream>

#include "farfield/core/errors.h"

namespace farfield::pipeline {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void Require(const fs::path& p) {
  if (!fs::exists(p)) throw DataError("missing file: " + p.string());
}

template <typename T>
T Field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": '" + key + "' has the wrong type");
  }
}

}  // namespace

void SessionManifest::CheckFiles() const {
  for (const auto& p : audio) Require(p);
  for (const auto& e : embeddings) Require(e.path);
  for (const auto& a : activities) Require(a.path);
  if (reference_rttm) Require(*reference_rttm);
  for (const auto& [speaker, p] : speaker_images) Require(p);
}

Manifest ManifestFromJson(const json& j, const fs::path& base_dir) {
  if (!j.is_object() || !j.contains("sessions") || !j.at("sessions").is_array()) {
    throw ConfigError("manifest: expected an object with a 'sessions' array");
  }
  Manifest m;
  for (const auto& s : j.at("sessions")) {
    SessionManifest session;
    session.session_id = Field<std::string>(s, "session_id", "manifest session");
    const std::string where = "manifest session '" + session.session_id + "'";
    for (const auto& p : Field<std::vector<std::string>>(s, "audio", where)) {
      session.audio.push_back(Resolve(base_dir, p));
    }
    if (session.audio.empty()) throw ConfigError(where + ": no audio");
    if (s.contains("sample_rate")) {
      session.sample_rate = Field<int>(s, "sample_rate", where);
    }
    if (s.contains("embeddings")) {
      for (const auto& e : s.at("embeddings")) {
        session.embeddings.push_back({Field<int>(e, "channel", where),
                                      Field<std::string>(e, "variant", where),
                                      Field<std::string>(e, "vad", where),
                                      Resolve(base_dir, Field<std::string>(e, "path", where))});
      }
    }
    if (s.contains("activities")) {
      for (const auto& a : s.at("activities")) {
        session.activities.push_back({Field<int>(a, "channel", where),
                                      Field<std::string>(a, "model", where),
                                      Resolve(base_dir, Field<std::string>(a, "path", where))});
      }
    }
    if (s.contains("reference_rttm") && !s.at("reference_rttm").is_null()) {
      session.reference_rttm = Resolve(base_dir, Field<std::string>(s, "reference_rttm", where));
    }
    if (s.contains("speaker_images")) {
      for (const auto& [speaker, p] :
           Field<std::map<std::string, std::string>>(s, "speaker_images", where)) {
        session.speaker_images.emplace_back(speaker, Resolve(base_dir, p));
      }
    }
    m.sessions.push_back(std::move(session));
  }
  return m;
}

json ManifestToJson(const Manifest& manifest) {
  json sessions = json::array();
  for (const auto& s : manifest.sessions) {
    json j;
    j["session_id"] = s.session_id;
    j["sample_rate"] = s.sample_rate;
    j["audio"] = json::array();
    for (const auto& p : s.audio) j["audio"].push_back(p.string());
    j["embeddings"] = json::array();
    for (const auto& e : s.embeddings) {
      j["embeddings"].push_back({{"channel", e.channel},
                                 {"variant", e.variant},
                                 {"vad", e.vad},
                                 {"path", e.path.string()}});
    }
    j["activities"] = json::array();
    for (const auto& a : s.activities) {
      j["activities"].push_back(
          {{"channel", a.channel}, {"model", a.model}, {"path", a.path.string()}});
    }
    j["reference_rttm"] = s.reference_rttm ? json(s.reference_rttm->string()) : json(nullptr);
    j["speaker_images"] = json::object();
    for (const auto& [speaker, p] : s.speaker_images) j["speaker_images"][speaker] = p.string();
    sessions.push_back(std::move(j));
  }
  return {{"sessions", sessions}};
}

Manifest LoadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  return ManifestFromJson(j, path.parent_path());
}

}  // namespace farfield::pipeline
