#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "farfield/core/assignment.h"
#include "farfield/core/audio.h"
#include "farfield/core/errors.h"
#include "farfield/core/segmentation.h"
#include "farfield/core/signal_ops.h"
#include "farfield/core/stft.h"
#include "farfield/core/wav_io.h"

namespace farfield {
namespace {

MultichannelAudio RandomAudio(int channels, Eigen::Index length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  auto audio = MultichannelAudio::Zeros(channels, length, 16000);
  for (Eigen::Index i = 0; i < audio.samples.size(); ++i) audio.samples.data()[i] = n(rng);
  return audio;
}

// Direct O(N^2) DFT of the windowed frame starting at `offset` of a padded signal.
std::vector<std::complex<double>> ReferenceFrame(const std::vector<double>& padded,
                                                 const std::vector<double>& window,
                                                 std::size_t offset) {
  const std::size_t n = window.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(k * i) / n;
      acc += padded[offset + i] * window[i] * std::polar(1.0, phase);
    }
    out[k] = acc;
  }
  return out;
}

TEST(Stft, MatchesDirectDft) {
  StftParams p{64, 16, Window::kHann, Padding::kNone};
  const auto audio = RandomAudio(1, 300, 1);
  const auto tensor = Stft(audio, p);
  std::vector<double> x(audio.samples.data(), audio.samples.data() + audio.length());
  const auto w = p.WindowCoefficients();
  for (int t = 0; t < tensor.frames(); t += 3) {
    const auto ref = ReferenceFrame(x, w, static_cast<std::size_t>(t) * 16);
    for (int f = 0; f < tensor.bins(); ++f) {
      EXPECT_NEAR(std::abs(tensor(0, t, f) - ref[static_cast<std::size_t>(f)]), 0.0, 1e-9);
    }
  }
}

TEST(Stft, ZeroSignalGivesZeroTensor) {
  const auto tensor = Stft(MultichannelAudio::Zeros(2, 4000, 16000), StftParams{});
  EXPECT_EQ(tensor.SquaredNorm(), 0.0);
  const auto back = Istft(tensor, StftParams{});
  EXPECT_EQ(back.samples.squaredNorm(), 0.0);
  EXPECT_EQ(back.length(), 4000);
}

TEST(Stft, IsLinear) {
  StftParams p{256, 64};
  const auto a = RandomAudio(2, 3000, 2);
  const auto b = RandomAudio(2, 3000, 3);
  MultichannelAudio sum{a.samples * 2.0 - b.samples * 0.5, 16000};
  const auto ta = Stft(a, p), tb = Stft(b, p), ts = Stft(sum, p);
  double err = 0.0;
  for (int f = 0; f < ts.bins(); ++f) {
    err += (ts.Bin(f) - (2.0 * ta.Bin(f) - 0.5 * tb.Bin(f))).squaredNorm();
  }
  EXPECT_LT(std::sqrt(err / ts.SquaredNorm()), 1e-12);
}

TEST(Stft, BinCenterSinusoidConcentratesEnergy) {
  StftParams p{512, 128, Window::kHann, Padding::kNone};
  const int bin = 32;  // 32 periods per frame
  auto audio = MultichannelAudio::Zeros(1, 4096, 16000);
  for (Eigen::Index i = 0; i < audio.length(); ++i) {
    audio.samples(0, i) = std::cos(2.0 * std::numbers::pi * bin * i / 512.0);
  }
  const auto tensor = Stft(audio, p);
  for (int t = 0; t < tensor.frames(); ++t) {
    double total = 0.0;
    for (int f = 0; f < tensor.bins(); ++f) total += std::norm(tensor(0, t, f));
    // The Hann main lobe spans bins k-1..k+1 of a bin-center tone.
    double lobe = 0.0;
    for (int f = bin - 1; f <= bin + 1; ++f) lobe += std::norm(tensor(0, t, f));
    EXPECT_GE(lobe / total, 0.99);
  }
}

TEST(Stft, SqrtHannHalfOverlapRoundTrip) {
  StftParams p{512, 256, Window::kSqrtHann, Padding::kCenter};
  ASSERT_TRUE(p.IsCola());
  const auto audio = RandomAudio(3, 10000, 4);
  const auto back = Istft(Stft(audio, p), p);
  ASSERT_EQ(back.length(), audio.length());
  EXPECT_LT((back.samples - audio.samples).norm() / audio.samples.norm(), 1e-9);
}

TEST(Stft, OneSidedEnergyMatchesParseval) {
  StftParams p{128, 32, Window::kHann, Padding::kNone};
  const auto audio = RandomAudio(1, 128, 5);
  const auto tensor = Stft(audio, p);
  const auto w = p.WindowCoefficients();
  double time_energy = 0.0;
  for (int i = 0; i < 128; ++i) time_energy += std::pow(audio.samples(0, i) * w[i], 2);
  Eigen::VectorXcd spec(tensor.bins());
  for (int f = 0; f < tensor.bins(); ++f) spec(f) = tensor(0, 0, f);
  EXPECT_NEAR(OneSidedSpectrumEnergy(spec, 128), time_energy, 1e-9 * time_energy);
}

TEST(Stft, RejectsInvalidShift) {
  EXPECT_THROW((StftParams{256, 0}.Validate()), std::invalid_argument);
  EXPECT_THROW((StftParams{256, 300}.Validate()), std::invalid_argument);
}

TEST(SignalOps, FftConvolveMatchesDirect) {
  Eigen::VectorXd a = Eigen::VectorXd::Random(37), b = Eigen::VectorXd::Random(11);
  const auto c = FftConvolve(a, b);
  ASSERT_EQ(c.size(), 47);
  for (int n = 0; n < 47; ++n) {
    double ref = 0.0;
    for (int k = 0; k < 11; ++k) {
      if (n - k >= 0 && n - k < 37) ref += b(k) * a(n - k);
    }
    EXPECT_NEAR(c(n), ref, 1e-12);
  }
}

TEST(SignalOps, AbsQuantileNearestRank) {
  const std::vector<double> x{0.1, -0.2, 5.0};
  EXPECT_DOUBLE_EQ(AbsQuantile(x, 2.0 / 3.0), 0.2);
  EXPECT_DOUBLE_EQ(AbsQuantile(x, 1.0), 5.0);
}

TEST(Assignment, MatchesBruteForce) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 5;
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < g.size(); ++i) g.data()[i] = u(rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g(i, perm[i]);
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto got = MaxWeightAssignment(g);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += g(i, got[i]);
    EXPECT_NEAR(s, best, 1e-12);
  }
}

TEST(Assignment, RectangularLeavesRowsUnmatched) {
  Eigen::MatrixXd g(3, 1);
  g << 0.1, 0.9, 0.5;
  const auto got = MaxWeightAssignment(g);
  EXPECT_EQ(got, (std::vector<int>{-1, 0, -1}));
}

TEST(Segmentation, RttmRoundTrip) {
  Segmentation seg{"sess", {{"b", 1.5, 2.25}, {"a", 0.0, 1.0}}};
  seg.Sort();
  std::stringstream ss;
  WriteRttm(ss, seg);
  const auto parsed = ReadRttm(ss);
  ASSERT_EQ(parsed.count("sess"), 1u);
  EXPECT_EQ(parsed.at("sess"), seg);
}

TEST(Segmentation, NormalizedMergesSameSpeaker) {
  Segmentation seg{"s", {{"a", 0.0, 1.0}, {"a", 1.0, 2.0}, {"b", 0.5, 1.5}}};
  const auto n = seg.Normalized();
  ASSERT_EQ(n.turns.size(), 2u);
  EXPECT_EQ(n.turns[0], (Turn{"a", 0.0, 2.0}));
}

TEST(Segmentation, ValidateRejectsEmptyTurn) {
  Segmentation seg{"s", {{"a", 1.0, 1.0}}};
  EXPECT_THROW(seg.Validate(), DataError);
}

TEST(WavIo, FloatRoundTripAndPcmClip) {
  const auto dir = std::filesystem::temp_directory_path() / "farfield_wav_test";
  std::filesystem::create_directories(dir);
  auto audio = RandomAudio(2, 1000, 7);
  audio.samples *= 0.1;
  WriteWav(dir / "f.wav", audio);
  const auto back = ReadWav(dir / "f.wav");
  EXPECT_EQ(back.channels(), 2);
  EXPECT_LT((back.samples - audio.samples).cwiseAbs().maxCoeff(), 1e-7);

  audio.samples(0, 0) = 3.0;
  WriteWav(dir / "p.wav", audio, WavFormat::kPcm16);
  const auto pcm = ReadWav(dir / "p.wav");
  EXPECT_LT(pcm.samples(0, 0), 1.0);
  EXPECT_GT(pcm.samples(0, 0), 0.999);
  EXPECT_THROW(ReadWav(dir / "missing.wav"), DataError);
  std::filesystem::remove_all(dir);
}

TEST(Audio, ValidateRejectsNonFinite) {
  auto audio = MultichannelAudio::Zeros(1, 10, 16000);
  audio.samples(0, 3) = std::nan("");
  EXPECT_THROW(audio.Validate(), DataError);
}

}  // namespace
}  // namespace farfield
