#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace farfield {

struct Turn {
  std::string speaker;
  double start = 0.0;  // seconds
  double end = 0.0;

  double duration() const { return end - start; }
  bool operator==(const Turn&) const = default;
};

// Speaker-labeled time intervals of one session. Turns of different speakers
// may overlap.
struct Segmentation {
  std::string session_id;
  std::vector<Turn> turns;

  // Sorted, unique speaker labels.
  std::vector<std::string> Speakers() const;
  std::size_t NumSpeakers() const { return Speakers().size(); }
  // Throws DataError unless start < end for every turn.
  void Validate() const;
  // Orders turns by (start, end, speaker).
  void Sort();
  // Merges overlapping or touching turns of the same speaker.
  Segmentation Normalized() const;
  double End() const;

  bool operator==(const Segmentation&) const = default;
};

// Writes SPEAKER lines with millisecond resolution.
void WriteRttm(std::ostream& os, const Segmentation& seg);
void WriteRttmFile(const std::filesystem::path& path, const Segmentation& seg);

// Parses SPEAKER lines; other line types are ignored. Sessions are keyed by
// the RTTM file id.
std::map<std::string, Segmentation> ReadRttm(std::istream& is);
std::map<std::string, Segmentation> ReadRttmFile(
    const std::filesystem::path& path);

}  // namespace farfield
