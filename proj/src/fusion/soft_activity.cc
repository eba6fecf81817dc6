#include "farfield/fusion/soft_activity.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "farfield/core/errors.h"

namespace farfield::fusion {

std::string SoftActivity::Label(int speaker) const {
  if (!labels.empty()) return labels.at(speaker);
  return "spk" + std::to_string(speaker);
}

void SoftActivity::Validate() const {
  if (!(frame_step > 0.0)) throw DataError("soft activity frame_step must be > 0");
  if (probs.size() > 0 &&
      (!probs.allFinite() || probs.minCoeff() < 0.0 || probs.maxCoeff() > 1.0)) {
    throw DataError("soft activity values must lie in [0, 1]");
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != speakers()) {
    throw DataError("soft activity label count does not match speakers");
  }
}

int SoftActivity::FrameAt(double seconds) const {
  const auto t = static_cast<long>(std::floor(seconds / frame_step));
  return static_cast<int>(std::clamp<long>(t, 0, std::max(frames() - 1, 0)));
}

SoftActivity ReadSoftActivity(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open activity file: " + path.string());
  char magic[4];
  std::uint32_t speakers = 0, frames = 0;
  double step = 0.0;
  if (!is.read(magic, 4) || std::memcmp(magic, "ACT1", 4) != 0) {
    throw DataError("bad activity file magic: " + path.string());
  }
  is.read(reinterpret_cast<char*>(&speakers), 4);
  is.read(reinterpret_cast<char*>(&frames), 4);
  is.read(reinterpret_cast<char*>(&step), 8);
  std::vector<float> buf(static_cast<std::size_t>(speakers) * frames);
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!is) throw DataError("truncated activity file: " + path.string());
  SoftActivity a;
  a.frame_step = step;
  a.source_tag = path.stem().string();
  a.probs = Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>(buf.data(), speakers,
                                                       frames)
                .cast<double>();
  a.Validate();
  return a;
}

void WriteSoftActivity(const std::filesystem::path& path,
                       const SoftActivity& activity) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write activity file: " + path.string());
  const auto speakers = static_cast<std::uint32_t>(activity.speakers());
  const auto frames = static_cast<std::uint32_t>(activity.frames());
  os.write("ACT1", 4);
  os.write(reinterpret_cast<const char*>(&speakers), 4);
  os.write(reinterpret_cast<const char*>(&frames), 4);
  os.write(reinterpret_cast<const char*>(&activity.frame_step), 8);
  const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      f = activity.probs.cast<float>();
  os.write(reinterpret_cast<const char*>(f.data()),
           static_cast<std::streamsize>(f.size() * sizeof(float)));
  if (!os) throw DataError("failed writing activity file: " + path.string());
}

SoftActivity Rasterize(const Segmentation& seg,
                       const std::vector<std::string>& speakers,
                       double frame_step, int frames) {
  SoftActivity a;
  a.session_id = seg.session_id;
  a.frame_step = frame_step;
  a.labels = speakers;
  a.probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(speakers.size()),
                                  frames);
  for (const auto& turn : seg.turns) {
    const auto it = std::find(speakers.begin(), speakers.end(), turn.speaker);
    if (it == speakers.end()) continue;
    const auto row = static_cast<Eigen::Index>(it - speakers.begin());
    // Frames whose center (t + 0.5) * step lies in [start, end).
    const long first = static_cast<long>(std::ceil(turn.start / frame_step - 0.5));
    const long last = static_cast<long>(std::ceil(turn.end / frame_step - 0.5));
    for (long t = std::max(first, 0L); t < std::min<long>(last, frames); ++t) {
      a.probs(row, t) = 1.0;
    }
  }
  return a;
}

}  // namespace farfield::fusion
