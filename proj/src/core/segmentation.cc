#include "farfield/core/segmentation.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "farfield/core/errors.h"

namespace farfield {

std::vector<std::string> Segmentation::Speakers() const {
  std::set<std::string> s;
  for (const auto& t : turns) s.insert(t.speaker);
  return {s.begin(), s.end()};
}

void Segmentation::Validate() const {
  for (const auto& t : turns) {
    if (!(t.start < t.end)) {
      std::ostringstream msg;
      msg << "turn of speaker '" << t.speaker << "' has start " << t.start
          << " >= end " << t.end;
      throw DataError(msg.str());
    }
  }
}

void Segmentation::Sort() {
  std::sort(turns.begin(), turns.end(), [](const Turn& a, const Turn& b) {
    return std::tie(a.start, a.end, a.speaker) <
           std::tie(b.start, b.end, b.speaker);
  });
}

Segmentation Segmentation::Normalized() const {
  Segmentation out{session_id, {}};
  for (const auto& spk : Speakers()) {
    std::vector<Turn> mine;
    for (const auto& t : turns) {
      if (t.speaker == spk) mine.push_back(t);
    }
    std::sort(mine.begin(), mine.end(),
              [](const Turn& a, const Turn& b) { return a.start < b.start; });
    for (const auto& t : mine) {
      if (!out.turns.empty() && out.turns.back().speaker == spk &&
          t.start <= out.turns.back().end) {
        out.turns.back().end = std::max(out.turns.back().end, t.end);
      } else {
        out.turns.push_back(t);
      }
    }
  }
  out.Sort();
  return out;
}

double Segmentation::End() const {
  double e = 0.0;
  for (const auto& t : turns) e = std::max(e, t.end);
  return e;
}

void WriteRttm(std::ostream& os, const Segmentation& seg) {
  Segmentation sorted = seg;
  sorted.Sort();
  const std::string id = seg.session_id.empty() ? "session" : seg.session_id;
  os << std::fixed << std::setprecision(3);
  for (const auto& t : sorted.turns) {
    os << "SPEAKER " << id << " 1 " << t.start << ' ' << t.duration()
       << " <NA> <NA> " << t.speaker << " <NA> <NA>\n";
  }
}

void WriteRttmFile(const std::filesystem::path& path, const Segmentation& seg) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write RTTM file: " + path.string());
  WriteRttm(os, seg);
}

std::map<std::string, Segmentation> ReadRttm(std::istream& is) {
  std::map<std::string, Segmentation> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string type, file, chan, name;
    double start = 0.0, dur = 0.0;
    std::string ortho, stype;
    if (!(fields >> type) || type != "SPEAKER") continue;
    if (!(fields >> file >> chan >> start >> dur >> ortho >> stype >> name)) {
      throw DataError("malformed RTTM line " + std::to_string(lineno) + ": " +
                      line);
    }
    if (dur <= 0.0) continue;
    auto& seg = out[file];
    seg.session_id = file;
    seg.turns.push_back({name, start, start + dur});
  }
  for (auto& [id, seg] : out) seg.Sort();
  return out;
}

std::map<std::string, Segmentation> ReadRttmFile(
    const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open RTTM file: " + path.string());
  return ReadRttm(is);
}

}  // namespace farfield
