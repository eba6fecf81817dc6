#include "farfield/diarize/embedding_set.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "farfield/core/errors.h"

namespace farfield::diarize {
namespace {

template <typename T>
T ReadPod(std::istream& is, const std::filesystem::path& path) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw DataError("truncated embedding file: " + path.string());
  }
  return v;
}

template <typename T>
void WritePod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

void EmbeddingSet::Validate() const {
  double prev_start = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.vectors.empty()) {
      throw DataError("embedding entry " + std::to_string(i) + " has no vectors");
    }
    if (!(e.start < e.end)) {
      throw DataError("embedding entry " + std::to_string(i) +
                      " has start >= end");
    }
    if (e.start < prev_start) {
      throw DataError("embedding entries are not sorted by start time");
    }
    prev_start = e.start;
    for (const auto& v : e.vectors) {
      if (v.size() != dim) {
        throw DataError("embedding entry " + std::to_string(i) +
                        " has dimension " + std::to_string(v.size()) +
                        ", expected " + std::to_string(dim));
      }
    }
  }
}

std::size_t EmbeddingSet::NumVectors() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.vectors.size();
  return n;
}

EmbeddingSet ReadEmbeddings(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open embedding file: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "EMB1", 4) != 0) {
    throw DataError("bad embedding file magic: " + path.string());
  }
  EmbeddingSet set;
  set.dim = static_cast<int>(ReadPod<std::uint32_t>(is, path));
  const auto count = ReadPod<std::uint32_t>(is, path);
  set.source_tag = path.stem().string();
  set.entries.reserve(count);
  std::vector<float> buf(set.dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    EmbeddingEntry e;
    e.start = ReadPod<double>(is, path);
    e.end = ReadPod<double>(is, path);
    const auto n = ReadPod<std::uint32_t>(is, path);
    for (std::uint32_t k = 0; k < n; ++k) {
      if (!is.read(reinterpret_cast<char*>(buf.data()),
                   static_cast<std::streamsize>(buf.size() * sizeof(float)))) {
        throw DataError("truncated embedding file: " + path.string());
      }
      e.vectors.push_back(
          Eigen::Map<Eigen::VectorXf>(buf.data(), set.dim).cast<double>());
    }
    set.entries.push_back(std::move(e));
  }
  set.Validate();
  return set;
}

void WriteEmbeddings(const std::filesystem::path& path,
                     const EmbeddingSet& set) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write embedding file: " + path.string());
  os.write("EMB1", 4);
  WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(set.dim));
  WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(set.entries.size()));
  for (const auto& e : set.entries) {
    WritePod<double>(os, e.start);
    WritePod<double>(os, e.end);
    WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(e.vectors.size()));
    for (const auto& v : e.vectors) {
      const Eigen::VectorXf f = v.cast<float>();
      os.write(reinterpret_cast<const char*>(f.data()),
               static_cast<std::streamsize>(f.size() * sizeof(float)));
    }
  }
  if (!os) throw DataError("failed writing embedding file: " + path.string());
}

double CosineSimilarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

FrameSplit SelectSingleSpeakerFrames(const EmbeddingSet& set,
                                     double threshold) {
  FrameSplit split;
  split.single.dim = split.mixed.dim = set.dim;
  split.single.source_tag = split.mixed.source_tag = set.source_tag;
  for (const auto& e : set.entries) {
    bool single = true;
    for (std::size_t i = 0; i < e.vectors.size() && single; ++i) {
      for (std::size_t j = i + 1; j < e.vectors.size(); ++j) {
        if (!(CosineSimilarity(e.vectors[i], e.vectors[j]) > threshold)) {
          single = false;
          break;
        }
      }
    }
    if (!single) {
      split.mixed.entries.push_back(e);
      continue;
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(set.dim);
    for (const auto& v : e.vectors) mean += v;
    mean /= static_cast<double>(e.vectors.size());
    const double norm = mean.norm();
    if (norm > 0.0) mean /= norm;
    split.single.entries.push_back({e.start, e.end, {std::move(mean)}});
  }
  return split;
}

EmbeddingSet ConcatNormalize(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.entries.size() != b.entries.size()) {
    throw DataError("concat_normalize: entry counts differ");
  }
  EmbeddingSet out;
  out.dim = a.dim + b.dim;
  out.source_tag = a.source_tag + "+" + b.source_tag;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& ea = a.entries[i];
    const auto& eb = b.entries[i];
    if (ea.start != eb.start || ea.end != eb.end ||
        ea.vectors.size() != eb.vectors.size()) {
      throw DataError("concat_normalize: timelines differ at entry " +
                      std::to_string(i));
    }
    EmbeddingEntry e{ea.start, ea.end, {}};
    for (std::size_t k = 0; k < ea.vectors.size(); ++k) {
      Eigen::VectorXd v(out.dim);
      v << ea.vectors[k], eb.vectors[k];
      const double norm = v.norm();
      if (norm == 0.0) {
        throw DataError("concat_normalize: zero-norm vector at entry " +
                        std::to_string(i));
      }
      e.vectors.push_back(v / norm);
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace farfield::diarize
