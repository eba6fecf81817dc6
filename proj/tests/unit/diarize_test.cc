#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "farfield/core/errors.h"
#include "farfield/diarize/clustering.h"
#include "farfield/diarize/diarizer.h"
#include "farfield/diarize/embedding_set.h"
#include "farfield/diarize/reduce.h"

namespace farfield::diarize {
namespace {

Eigen::VectorXd Unit(int dim, int i) { return Eigen::VectorXd::Unit(dim, i); }

TEST(SingleSpeaker, Examples) {
  EmbeddingSet set;
  set.dim = 2;
  set.entries.push_back({0.0, 0.1, {Unit(2, 0)}});
  set.entries.push_back({0.1, 0.2, {Unit(2, 1), Unit(2, 1)}});
  set.entries.push_back({0.2, 0.3, {Unit(2, 0), Unit(2, 1)}});
  const auto split = SelectSingleSpeakerFrames(set, 0.5);
  ASSERT_EQ(split.single.entries.size(), 2u);
  EXPECT_TRUE(split.single.entries[1].vectors[0].isApprox(Unit(2, 1)));
  ASSERT_EQ(split.mixed.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(split.mixed.entries[0].start, 0.2);
}

TEST(ConcatNormalize, UnitNormAndZeroPart) {
  EmbeddingSet a, b;
  a.dim = 2;
  b.dim = 3;
  a.entries.push_back({0.0, 1.0, {Unit(2, 0)}});
  b.entries.push_back({0.0, 1.0, {Unit(3, 2)}});
  a.entries.push_back({1.0, 2.0, {Unit(2, 1)}});
  b.entries.push_back({1.0, 2.0, {Eigen::VectorXd::Zero(3)}});
  const auto c = ConcatNormalize(a, b);
  EXPECT_EQ(c.dim, 5);
  EXPECT_NEAR(c.entries[0].vectors[0].norm(), 1.0, 1e-12);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(5);
  expected(1) = 1.0;
  EXPECT_TRUE(c.entries[1].vectors[0].isApprox(expected));
  b.entries[1].start = 1.5;
  EXPECT_THROW(ConcatNormalize(a, b), DataError);
}

double MaxDistanceError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = i + 1; j < a.rows(); ++j) {
      worst = std::max(worst, std::abs((a.row(i) - a.row(j)).norm() -
                                       (b.row(i) - b.row(j)).norm()));
    }
  }
  return worst;
}

TEST(ReduceDim, PlaneInTenDimensionsKeepsDistances) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  Eigen::MatrixXd basis(2, 10), coords(30, 2);
  for (int i = 0; i < basis.size(); ++i) basis.data()[i] = n(rng);
  for (int i = 0; i < coords.size(); ++i) coords.data()[i] = n(rng);
  const Eigen::MatrixXd x = coords * basis;
  EXPECT_LT(MaxDistanceError(x, ReduceDim(x, 2, Reduction::kLinear)), 1e-9);
  EXPECT_LT(MaxDistanceError(x, ReduceDim(x, 10, Reduction::kLinear)), 1e-9);
  EXPECT_EQ(ReduceDim(x, 10, Reduction::kExternal), x);
}

TEST(ReduceDim, BlobSeparationRatioPreserved) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  Eigen::MatrixXd x(100, 50);
  Eigen::VectorXd offset(50);
  for (auto& v : offset) v = 3.0 * n(rng);
  for (int i = 0; i < 100; ++i) {
    for (int d = 0; d < 50; ++d) x(i, d) = n(rng) + (i < 50 ? offset(d) : 0.0);
  }
  auto ratio = [](const Eigen::MatrixXd& m) {
    const Eigen::RowVectorXd c0 = m.topRows(50).colwise().mean();
    const Eigen::RowVectorXd c1 = m.bottomRows(50).colwise().mean();
    double within = 0.0;
    int pairs = 0;
    for (int i = 0; i < 100; ++i) {
      for (int j = i + 1; j < 100; ++j) {
        if ((i < 50) != (j < 50)) continue;
        within += (m.row(i) - m.row(j)).norm();
        ++pairs;
      }
    }
    return (c0 - c1).norm() / (within / pairs);
  };
  const double r_in = ratio(x), r_out = ratio(ReduceDim(x, 12, Reduction::kLinear));
  EXPECT_LT(std::max(r_in / r_out, r_out / r_in), 2.0);
}

Eigen::MatrixXd Blobs(int count, int per_blob, int dim, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Eigen::MatrixXd x(count * per_blob, dim);
  for (int b = 0; b < count; ++b) {
    for (int i = 0; i < per_blob; ++i) {
      for (int d = 0; d < dim; ++d) {
        x(b * per_blob + i, d) = (d == b ? 1.0 : 0.0) + spread * n(rng);
      }
    }
  }
  return x;
}

TEST(GmmCluster, EightSeparatedBlobs) {
  const int blobs = 8, per = 40;
  const auto x = Blobs(blobs, per, 8, 0.02, 3);
  DiarizeConfig cfg;
  const auto set = GmmCluster(x, cfg, 7);
  std::map<int, std::set<int>> blob_to_label;
  std::map<int, std::set<int>> label_to_blob;
  for (int i = 0; i < x.rows(); ++i) {
    blob_to_label[i / per].insert(set.assignments[i]);
    label_to_blob[set.assignments[i]].insert(i / per);
  }
  for (const auto& [b, labels] : blob_to_label) EXPECT_EQ(labels.size(), 1u);
  for (const auto& [l, bs] : label_to_blob) EXPECT_EQ(bs.size(), 1u);
  EXPECT_EQ(CountSpeakers(MergeRejectClusters(set, cfg)), 8);
}

TEST(GmmCluster, IdenticalPointsGiveOneCluster) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(50, 4);
  const auto set = GmmCluster(x, DiarizeConfig{}, 1);
  EXPECT_EQ(set.NumSurviving(), 1);
  EXPECT_EQ(CountSpeakers(set), 1);
}

TEST(GmmCluster, TwoBlobsSurviveMergeReject) {
  const auto x = Blobs(2, 100, 8, 0.05, 4);
  DiarizeConfig cfg;
  const auto merged = MergeRejectClusters(GmmCluster(x, cfg, 2), cfg);
  EXPECT_EQ(CountSpeakers(merged), 2);
}

TEST(GmmFit, LogLikelihoodNonDecreasing) {
  const auto x = Blobs(3, 60, 4, 0.3, 5);
  const auto fit = FitDiagonalGmm(x, 3, 9);
  for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i) {
    EXPECT_GE(fit.log_likelihood[i], fit.log_likelihood[i - 1] - 1e-9);
  }
}

ClusterSet TwoClusters(const Eigen::VectorXd& c0, const Eigen::VectorXd& c1, int n0, int n1) {
  ClusterSet set;
  set.clusters = {{0, c0.normalized(), n0, false}, {1, c1.normalized(), n1, false}};
  set.assignments.assign(n0, 0);
  set.assignments.insert(set.assignments.end(), n1, 1);
  return set;
}

TEST(MergeReject, IdenticalCentroidsMerge) {
  const auto merged =
      MergeRejectClusters(TwoClusters(Unit(3, 0), Unit(3, 0), 10, 12), DiarizeConfig{});
  EXPECT_EQ(merged.NumSurviving(), 1);
}

TEST(MergeReject, FixpointWhenNothingApplies) {
  const auto set = TwoClusters(Unit(3, 0), Unit(3, 1), 10, 12);
  const auto out = MergeRejectClusters(set, DiarizeConfig{});
  EXPECT_EQ(out.assignments, set.assignments);
  EXPECT_EQ(out.SurvivingIds(), set.SurvivingIds());
}

EmbeddingSet Frames(const std::vector<Eigen::VectorXd>& vecs, double step) {
  EmbeddingSet set;
  set.dim = static_cast<int>(vecs[0].size());
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    set.entries.push_back({i * step, (i + 1) * step, {vecs[i]}});
  }
  return set;
}

TEST(AssignMixed, MixedEntryActivatesBothSpeakers) {
  auto clusters = TwoClusters(Unit(2, 0), Unit(2, 1), 2, 2);
  const auto single = Frames({Unit(2, 0), Unit(2, 0), Unit(2, 1), Unit(2, 1)}, 0.1);
  EmbeddingSet mixed;
  mixed.dim = 2;
  mixed.entries.push_back({0.4, 0.5, {Unit(2, 0), Unit(2, 1)}});
  const auto seg = AssignMixedFrames(clusters, single, mixed, 0.1);
  double overlap_a = 0.0, overlap_b = 0.0;
  for (const auto& t : seg.turns) {
    const double o = std::max(0.0, std::min(t.end, 0.5) - std::max(t.start, 0.4));
    (t.speaker == seg.turns.front().speaker ? overlap_a : overlap_b) += o;
  }
  EXPECT_NEAR(overlap_a, 0.1, 1e-9);
  EXPECT_NEAR(overlap_b, 0.1, 1e-9);
}

TEST(AssignMixed, SingleFramesReproduceAssignments) {
  auto clusters = TwoClusters(Unit(2, 0), Unit(2, 1), 2, 2);
  clusters.assignments = {0, 0, 1, 1};
  const auto single = Frames({Unit(2, 0), Unit(2, 0), Unit(2, 1), Unit(2, 1)}, 0.1);
  const auto seg = AssignMixedFrames(clusters, single, EmbeddingSet{{}, 2, ""}, 0.1);
  ASSERT_EQ(seg.turns.size(), 2u);
  EXPECT_NEAR(seg.turns[0].start, 0.0, 1e-12);
  EXPECT_NEAR(seg.turns[0].end, 0.2, 1e-12);
  EXPECT_NEAR(seg.turns[1].start, 0.2, 1e-12);
  EXPECT_NEAR(seg.turns[1].end, 0.4, 1e-12);
  EXPECT_NE(seg.turns[0].speaker, seg.turns[1].speaker);
}

TEST(Diarize, ThreeSpeakersWithOverlapRecoverBoundaries) {
  // Speaker 0 on [0,3), 1 on [3,6) with 2 joining on [5,6), then 2 on [6,9).
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  const double step = 0.1;
  auto noisy = [&](int s) {
    Eigen::VectorXd v = Unit(16, s);
    for (auto& x : v) x += 0.05 * n(rng);
    return Eigen::VectorXd(v.normalized());
  };
  EmbeddingSet set;
  set.dim = 16;
  for (int k = 0; k < 90; ++k) {
    const double t = k * step;
    EmbeddingEntry e{t, t + step, {}};
    if (t < 3.0 - 1e-9) e.vectors.push_back(noisy(0));
    else if (t < 6.0 - 1e-9) e.vectors.push_back(noisy(1));
    if (t >= 5.0 - 1e-9) e.vectors.push_back(noisy(2));
    set.entries.push_back(e);
  }
  DiarizeConfig cfg;
  const auto res = Diarize(set, cfg, {Reduction::kLinear, 3, {}});
  EXPECT_EQ(res.num_speakers, 3);
  const auto norm = res.segmentation.Normalized();
  std::map<std::string, std::pair<double, double>> span;
  for (const auto& t : norm.turns) {
    auto it = span.find(t.speaker);
    if (it == span.end()) span[t.speaker] = {t.start, t.end};
    else it->second = {std::min(it->second.first, t.start), std::max(it->second.second, t.end)};
  }
  std::vector<std::pair<double, double>> spans;
  for (const auto& [_, s] : span) spans.push_back(s);
  std::sort(spans.begin(), spans.end());
  ASSERT_EQ(spans.size(), 3u);
  const double expected[3][2] = {{0.0, 3.0}, {3.0, 6.0}, {5.0, 9.0}};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(spans[i].first, expected[i][0], step + 1e-9);
    EXPECT_NEAR(spans[i].second, expected[i][1], step + 1e-9);
  }
}

TEST(EmbeddingIo, RoundTrip) {
  EmbeddingSet set;
  set.dim = 3;
  set.entries.push_back({0.0, 0.5, {Eigen::Vector3d(0.5, 0.25, -1.0)}});
  set.entries.push_back({0.5, 1.0, {Unit(3, 0), Unit(3, 2)}});
  const auto path = std::filesystem::temp_directory_path() / "farfield_emb_test.emb";
  WriteEmbeddings(path, set);
  const auto back = ReadEmbeddings(path);
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[1].vectors.size(), 2u);
  EXPECT_TRUE(back.entries[0].vectors[0].isApprox(set.entries[0].vectors[0]));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace farfield::diarize
