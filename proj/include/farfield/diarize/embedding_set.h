#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace farfield::diarize {

// One time window with one or more speaker vectors; several vectors mark
// possibly mixed speech.
struct EmbeddingEntry {
  double start = 0.0;
  double end = 0.0;
  std::vector<Eigen::VectorXd> vectors;
};

struct EmbeddingSet {
  std::vector<EmbeddingEntry> entries;
  int dim = 0;
  std::string source_tag;

  // Throws DataError on mixed dimensionality, empty entries, start >= end
  // or entries out of time order.
  void Validate() const;
  std::size_t NumVectors() const;
};

// Binary layout (little-endian): "EMB1", dim u32, count u32, then per entry
// t_start f64, t_end f64, n_vectors u32, n_vectors * dim f32.
EmbeddingSet ReadEmbeddings(const std::filesystem::path& path);
void WriteEmbeddings(const std::filesystem::path& path, const EmbeddingSet& set);

struct FrameSplit {
  EmbeddingSet single;  // one (mean, renormalized) vector per entry
  EmbeddingSet mixed;   // entries kept unchanged
};

double CosineSimilarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// An entry is single-speaker when every pair of its vectors has cosine
// similarity above `threshold`.
FrameSplit SelectSingleSpeakerFrames(const EmbeddingSet& set, double threshold);

// Concatenates the vectors of two sets sharing one timeline and scales each
// result to unit length.
EmbeddingSet ConcatNormalize(const EmbeddingSet& a, const EmbeddingSet& b);

}  // namespace farfield::diarize
