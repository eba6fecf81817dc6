#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "farfield/core/signal_ops.h"
#include "farfield/preprocess/channel_rank.h"
#include "farfield/preprocess/clip_normalize.h"
#include "farfield/preprocess/wpe.h"

namespace farfield::preprocess {
namespace {

TEST(ClipNormalize, HandExample) {
  MultichannelAudio audio{SampleMatrix(1, 3), 16000};
  audio.samples << 0.1, -0.2, 5.0;
  const auto out = ClipNormalize(audio, {2.0 / 3.0, 1.0});
  EXPECT_NEAR(out.samples(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(out.samples(0, 1), -1.0, 1e-12);
  EXPECT_NEAR(out.samples(0, 2), 1.0, 1e-12);
}

TEST(ClipNormalize, SilentChannelPassesThrough) {
  auto audio = MultichannelAudio::Zeros(2, 100, 16000);
  audio.samples.row(1).setConstant(0.01);
  const auto out = ClipNormalize(audio, {});
  EXPECT_EQ(out.samples.row(0).squaredNorm(), 0.0);
}

TEST(ClipNormalize, BelowThresholdIsPureRescale) {
  MultichannelAudio audio{SampleMatrix(1, 4), 16000};
  audio.samples << 0.1, -0.3, 0.2, 0.05;
  const auto out = ClipNormalize(audio, {1.0, 0.9});
  EXPECT_NEAR((out.samples - audio.samples * 3.0).norm(), 0.0, 1e-12);
}

TEST(ClipNormalize, RejectsBadConfig) {
  EXPECT_THROW((ClipNormConfig{0.0, 0.9}.Validate()), std::exception);
  EXPECT_THROW((ClipNormConfig{0.99, 1.5}.Validate()), std::exception);
}

TEST(Wpe, ZeroInputGivesZeroOutput) {
  SpectralTensor t(2, 200, 5);
  WpeConfig cfg;
  cfg.block_seconds = 1000.0;
  EXPECT_EQ(WpeDereverberate(t, cfg).SquaredNorm(), 0.0);
}

TEST(Wpe, ApplyPredictionSubtractsDelayedFrames) {
  Eigen::MatrixXcd x(1, 6);
  x << 1, 2, 3, 4, 5, 6;
  PredictionFilter g = PredictionFilter::Zero(1, 1);
  g(0, 0) = 0.5;
  const auto y = ApplyPrediction(x, g, 1, 2);
  EXPECT_EQ(y(0, 0), std::complex<double>(1));
  EXPECT_EQ(y(0, 1), std::complex<double>(2));
  EXPECT_EQ(y(0, 2), std::complex<double>(3.0 - 0.5));
  EXPECT_EQ(y(0, 5), std::complex<double>(6.0 - 2.0));
}

TEST(Wpe, RemovesPredictableEcho) {
  // x_t = s_t + 0.6 s_{t-3}: the echo is linearly predictable from frame t-3.
  // The source has a time-varying variance, as WPE assumes.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  const int frames = 4000;
  Eigen::MatrixXcd s(1, frames), x(1, frames);
  for (int t = 0; t < frames; ++t) {
    const double sigma = std::exp(n(rng));
    s(0, t) = {sigma * n(rng), sigma * n(rng)};
  }
  for (int t = 0; t < frames; ++t) x(0, t) = s(0, t) + (t >= 3 ? 0.6 * s(0, t - 3) : 0.0);
  const auto y = WpeBin(x, WpeConfig{13, 3, 3, 120.0, 1e-10});
  EXPECT_LT((y - s).norm(), 0.5 * (x - s).norm());
}

TEST(ChannelRank, IdenticalChannelsTieInOrder) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  auto audio = MultichannelAudio::Zeros(2, 32000, 16000);
  for (Eigen::Index i = 0; i < audio.length(); ++i) {
    const double env = 0.5 + 0.5 * std::sin(2.0 * M_PI * 4.0 * i / 16000.0);
    audio.samples(0, i) = audio.samples(1, i) = env * n(rng);
  }
  const auto r = EnvelopeVarianceRank(audio);
  EXPECT_DOUBLE_EQ(r.scores[0], r.scores[1]);
  EXPECT_EQ(r.order, (std::vector<int>{0, 1}));
}

TEST(ChannelRank, ReverberationLowersScoreAndSilenceIsLast) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  const int len = 48000;
  Eigen::VectorXd dry(len);
  for (int i = 0; i < len; ++i) {
    const double env = std::pow(std::max(0.0, std::sin(2.0 * M_PI * 3.0 * i / 16000.0)), 2);
    dry(i) = env * n(rng);
  }
  Eigen::VectorXd rir(9600);
  for (int i = 0; i < rir.size(); ++i) rir(i) = n(rng) * std::exp(-6.9 * i / 9600.0);
  rir(0) = 1.0;
  const Eigen::VectorXd wet = FftConvolve(dry, rir).head(len);
  auto audio = MultichannelAudio::Zeros(3, len, 16000);
  audio.samples.row(0) = wet.transpose() / wet.cwiseAbs().maxCoeff();
  audio.samples.row(2) = dry.transpose() / dry.cwiseAbs().maxCoeff();
  const auto r = EnvelopeVarianceRank(audio);
  EXPECT_GT(r.scores[2], r.scores[0]);
  EXPECT_EQ(r.scores[1], 0.0);
  EXPECT_EQ(r.order.back(), 1);
}

TEST(ChannelRank, SelectTopChannelsUsesCeiling) {
  ChannelRanking r;
  r.order = {9, 3, 1, 0, 2, 4, 5, 6, 7, 8};
  r.scores.assign(10, 0.0);
  const auto top8 = SelectTopChannels(r, 0.8);
  EXPECT_EQ(top8, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 9}));
  EXPECT_EQ(SelectTopChannels(r, 1.0).size(), 10u);
  r.order = {4, 3, 2, 1, 0};
  EXPECT_EQ(SelectTopChannels(r, 0.5), (std::vector<int>{2, 3, 4}));
}

TEST(ChannelRank, MelFilterbankRowsArePeaked) {
  const auto fb = MelFilterbank(40, 513, 16000, 20.0, 7600.0);
  ASSERT_EQ(fb.rows(), 40);
  for (int b = 0; b < 40; ++b) {
    EXPECT_GT(fb.row(b).maxCoeff(), 0.0);
    EXPECT_GE(fb.row(b).minCoeff(), 0.0);
  }
}

}  // namespace
}  // namespace farfield::preprocess
