#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "farfield/core/errors.h"
#include "farfield/metrics/der.h"
#include "farfield/metrics/si_sdr.h"

namespace farfield::metrics {
namespace {

Segmentation Ref() {
  return {"s", {{"A", 0.0, 4.0}, {"B", 3.0, 7.0}, {"C", 8.0, 10.0}}};
}

TEST(Der, IdenticalIsZero) { EXPECT_DOUBLE_EQ(ComputeDer(Ref(), Ref()).der, 0.0); }

TEST(Der, LabelPermutationInvariant) {
  auto hyp = Ref();
  for (auto& t : hyp.turns) t.speaker = t.speaker == "A" ? "x" : t.speaker == "B" ? "y" : "z";
  const auto d = ComputeDer(Ref(), hyp);
  EXPECT_DOUBLE_EQ(d.der, 0.0);
  EXPECT_EQ(d.mapping.at("A"), "x");
}

TEST(Der, MissedTwoSecondsOfTen) {
  const Segmentation ref{"s", {{"A", 0.0, 10.0}}};
  const Segmentation hyp{"s", {{"A", 0.0, 8.0}}};
  const auto d = ComputeDer(ref, hyp, 0.0);
  EXPECT_DOUBLE_EQ(d.missed, 2.0);
  EXPECT_DOUBLE_EQ(d.der, 0.2);
}

TEST(Der, ConfusionAndFalseAlarm) {
  const Segmentation ref{"s", {{"A", 0.0, 10.0}}};
  const Segmentation hyp{"s", {{"A", 0.0, 5.0}, {"B", 5.0, 10.0}, {"A", 10.0, 11.0}}};
  const auto d = ComputeDer(ref, hyp);
  EXPECT_DOUBLE_EQ(d.confusion, 5.0);
  EXPECT_DOUBLE_EQ(d.false_alarm, 1.0);
  EXPECT_DOUBLE_EQ(d.der, 0.6);
}

TEST(Der, CollarExcludesBoundaries) {
  const Segmentation ref{"s", {{"A", 0.0, 10.0}}};
  const Segmentation hyp{"s", {{"A", 0.5, 9.5}}};
  EXPECT_DOUBLE_EQ(ComputeDer(ref, hyp, 0.5).der, 0.0);
}

TEST(Der, EmptyReferenceThrows) {
  EXPECT_THROW(ComputeDer(Segmentation{"s", {}}, Ref()), DataError);
}

TEST(SpeakerCount, Examples) {
  EXPECT_DOUBLE_EQ(SpeakerCountAccuracy({{4, 4}, {3, 3}}), 1.0);
  std::vector<std::pair<int, int>> eight(8, {4, 4});
  eight[3] = {4, 5};
  EXPECT_DOUBLE_EQ(SpeakerCountAccuracy(eight), 0.875);
  EXPECT_DOUBLE_EQ(SpeakerCountAccuracy({{4, 4}, {4, 3}}), 0.5);
}

TEST(SiSdr, IdentityAndScaleAreCapped) {
  std::vector<double> ref(1000);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (auto& v : ref) v = n(rng);
  std::vector<double> twice(ref);
  for (auto& v : twice) v *= 2.0;
  EXPECT_DOUBLE_EQ(SiSdr(ref, ref), kSiSdrCapDb);
  EXPECT_DOUBLE_EQ(SiSdr(twice, ref), kSiSdrCapDb);
}

TEST(SiSdr, EqualPowerOrthogonalNoiseIsZeroDb) {
  const int n = 1024;
  std::vector<double> ref(n), est(n);
  for (int i = 0; i < n; ++i) {
    ref[i] = std::cos(2.0 * M_PI * 8.0 * i / n);
    est[i] = ref[i] + std::sin(2.0 * M_PI * 8.0 * i / n);
  }
  EXPECT_NEAR(SiSdr(est, ref), 0.0, 1e-9);
}

}  // namespace
}  // namespace farfield::metrics
