#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "farfield/fusion/soft_activity.h"
#include "farfield/gss/cacgmm.h"
#include "farfield/gss/extract.h"
#include "farfield/gss/mvdr.h"

namespace farfield::gss {
namespace {

using Complex = std::complex<double>;

Complex RandomComplex(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return {n(rng), n(rng)};
}

// Independent EM with the same update rules, written out element by element.
std::vector<double> NaiveCacgmmLogLik(const Eigen::MatrixXcd& y, const Eigen::MatrixXd& priors,
                                      int iterations, Eigen::MatrixXd& gamma) {
  const int d = static_cast<int>(y.rows()), t_count = static_cast<int>(y.cols());
  const int k_count = static_cast<int>(priors.rows());
  Eigen::MatrixXcd z(d, t_count);
  for (int t = 0; t < t_count; ++t) z.col(t) = y.col(t) / y.col(t).norm();
  std::vector<Eigen::MatrixXcd> b(k_count, Eigen::MatrixXcd::Identity(d, d));
  auto log_density = [&](int k, int t) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(b[k]);
    double logdet = 0.0;
    for (int i = 0; i < d; ++i) logdet += std::log(es.eigenvalues()(i).real());
    const double quad = (z.col(t).adjoint() * b[k].inverse() * z.col(t))(0, 0).real();
    return std::lgamma(d) - std::log(2.0) - d * std::log(M_PI) - logdet - d * std::log(quad);
  };
  std::vector<double> ll;
  auto estep = [&]() {
    double total = 0.0;
    gamma.resize(k_count, t_count);
    for (int t = 0; t < t_count; ++t) {
      std::vector<double> lp(k_count);
      double mx = -1e300;
      for (int k = 0; k < k_count; ++k) {
        lp[k] = priors(k, t) > 0 ? std::log(priors(k, t)) + log_density(k, t) : -1e300;
        mx = std::max(mx, lp[k]);
      }
      double s = 0.0;
      for (int k = 0; k < k_count; ++k) s += std::exp(lp[k] - mx);
      for (int k = 0; k < k_count; ++k) gamma(k, t) = std::exp(lp[k] - mx) / s;
      total += mx + std::log(s);
    }
    ll.push_back(total / t_count);
  };
  estep();
  for (int it = 0; it < iterations; ++it) {
    for (int k = 0; k < k_count; ++k) {
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
      double w = 0.0;
      const Eigen::MatrixXcd inv = b[k].inverse();
      for (int t = 0; t < t_count; ++t) {
        const double quad = (z.col(t).adjoint() * inv * z.col(t))(0, 0).real();
        acc += gamma(k, t) * z.col(t) * z.col(t).adjoint() / quad;
        w += gamma(k, t);
      }
      b[k] = d * acc / w;
      b[k] = 0.5 * (b[k] + b[k].adjoint().eval());
      b[k] *= d / b[k].trace().real();
    }
    estep();
  }
  return ll;
}

TEST(Cacgmm, OrthogonalSteeringExclusiveActivity) {
  std::mt19937_64 rng(1);
  const int frames = 200;
  Eigen::MatrixXcd y(2, frames);
  Eigen::MatrixXd priors(2, frames);
  for (int t = 0; t < frames; ++t) {
    const int active = (t / 20) % 2;
    y.col(t).setZero();
    y(active, t) = RandomComplex(rng);
    y(1 - active, t) = 1e-3 * RandomComplex(rng);
    priors(0, t) = active == 0 ? 0.9 : 0.1;
    priors(1, t) = 1.0 - priors(0, t);
  }
  const auto res = CacgmmBin(y, priors, 5, false);
  for (int t = 0; t < frames; ++t) {
    EXPECT_GE(res.masks.bins[0]((t / 20) % 2, t), 0.99);
  }
}

TEST(Cacgmm, MatchesNaiveEm) {
  std::mt19937_64 rng(2);
  const int d = 3, frames = 150;
  Eigen::MatrixXcd y(d, frames);
  Eigen::MatrixXd priors(3, frames);
  Eigen::VectorXcd h0(d), h1(d);
  for (int i = 0; i < d; ++i) h0(i) = RandomComplex(rng), h1(i) = RandomComplex(rng);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int t = 0; t < frames; ++t) {
    for (int i = 0; i < d; ++i) y(i, t) = 0.1 * RandomComplex(rng);
    y.col(t) += (t % 3 == 0 ? h0 : h1) * RandomComplex(rng);
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += priors(k, t) = u(rng);
    priors.col(t) /= s;
  }
  Eigen::MatrixXd gamma;
  const auto naive = NaiveCacgmmLogLik(y, priors, 5, gamma);
  const auto res = CacgmmBin(y, priors, 5, false);
  ASSERT_EQ(res.log_likelihood[0].size(), naive.size());
  for (std::size_t i = 0; i < naive.size(); ++i) {
    EXPECT_NEAR(res.log_likelihood[0][i], naive[i], 1e-8);
    if (i > 0) EXPECT_GE(naive[i], naive[i - 1] - 1e-10);
  }
  EXPECT_LT((res.masks.bins[0] - gamma).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Cacgmm, NearRankOneScenesKeepLikelihoodMonotone) {
  // Two nearly rank-1 talkers plus a floored noise class: the noise class
  // collapses onto a few frames and its shape estimate turns singular.
  const int d = 4, frames = 250;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    Eigen::VectorXcd h0(d), h1(d);
    for (int i = 0; i < d; ++i) h0(i) = RandomComplex(rng), h1(i) = RandomComplex(rng);
    Eigen::MatrixXcd y(d, frames);
    Eigen::MatrixXd priors(3, frames);
    for (int t = 0; t < frames; ++t) {
      const bool first = t < frames / 2;
      for (int i = 0; i < d; ++i) y(i, t) = 1e-4 * RandomComplex(rng);
      y.col(t) += (first ? h0 : h1) * RandomComplex(rng);
      priors.col(t) << (first ? 0.99 : 0.0), (first ? 0.0 : 0.99), 0.01;
    }
    const auto res = CacgmmBin(y, priors, 5, false);
    const auto& ll = res.log_likelihood[0];
    for (std::size_t i = 1; i < ll.size(); ++i) {
      EXPECT_GE(ll[i], ll[i - 1] - 1e-9 * std::abs(ll[i - 1])) << "seed " << seed;
    }
  }
}

TEST(Cacgmm, SilentNoisePriorGivesFullSourceMask) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXcd y(2, 50);
  for (int i = 0; i < y.size(); ++i) y.data()[i] = RandomComplex(rng);
  Eigen::MatrixXd priors(2, 50);
  priors.row(0).setOnes();
  priors.row(1).setZero();
  const auto res = CacgmmBin(y, priors, 5, false);
  EXPECT_NEAR(res.masks.bins[0].row(0).minCoeff(), 1.0, 1e-12);
}

TEST(Cacgmm, ChunkBounds) {
  EXPECT_EQ(ChunkBounds(250, 300), (std::vector<std::pair<int, int>>{{0, 250}}));
  EXPECT_EQ(ChunkBounds(601, 300), (std::vector<std::pair<int, int>>{{0, 300}, {300, 601}}));
  EXPECT_EQ(ChunkBounds(700, 300),
            (std::vector<std::pair<int, int>>{{0, 300}, {300, 600}, {600, 700}}));
}

TEST(Cacgmm, ShortSegmentChunkedEqualsFull) {
  std::mt19937_64 rng(4);
  SpectralTensor t(2, 120, 4);
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < 120; ++k)
      for (int f = 0; f < 4; ++f) t(c, k, f) = RandomComplex(rng);
  t.params = StftParams{512, 128};
  const auto act = fusion::Rasterize({"s", {{"a", 0.0, 2.0}}}, {"a"}, 0.01, 500);
  GssConfig cfg;
  const auto full = CacgmmEm(t, act, cfg);
  cfg.chunk_frames = 300;
  const auto chunked = ChunkedCacgmm(t, act, cfg);
  for (int f = 0; f < 4; ++f) EXPECT_TRUE(full.masks.bins[f].isApprox(chunked.masks.bins[f]));
}

TEST(VadMask, ElementwiseProduct) {
  fusion::SoftActivity act;
  act.probs = Eigen::MatrixXd::Constant(2, 3, 0.8);
  Eigen::MatrixXd vad = Eigen::MatrixXd::Ones(2, 3);
  EXPECT_TRUE(ApplyVadMask(act, vad).probs.isApprox(act.probs));
  vad.row(1).setZero();
  const auto out = ApplyVadMask(act, vad);
  EXPECT_EQ(out.probs.row(1).sum(), 0.0);
  EXPECT_DOUBLE_EQ(out.probs(0, 2), 0.8);
}

TEST(Mvdr, NoiseFreeSingleSourceIsDistortionless) {
  std::mt19937_64 rng(5);
  const int d = 4, frames = 300;
  Eigen::VectorXcd h(d);
  for (int i = 0; i < d; ++i) h(i) = RandomComplex(rng);
  Eigen::MatrixXcd y(d, frames);
  for (int t = 0; t < frames; ++t) y.col(t) = h * RandomComplex(rng);
  const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(frames);
  const auto w = SoudenMvdrWeights(MaskedCovariance(y, ones),
                                   MaskedCovariance(y, Eigen::RowVectorXd::Zero(frames)), 1);
  EXPECT_NEAR(std::abs((w.adjoint() * h)(0, 0) - h(1)), 0.0, 1e-6 * std::abs(h(1)));
}

TEST(Mvdr, ZeroTensorGivesZeroOutput) {
  SpectralTensor t(2, 20, 3);
  MaskTensor masks;
  masks.bins.assign(3, Eigen::MatrixXd::Constant(2, 20, 0.5));
  const auto out = MvdrBeamform(t, masks, 0);
  EXPECT_EQ(out.output.SquaredNorm(), 0.0);
  EXPECT_EQ(out.output.channels(), 1);
}

TEST(Extract, TurnAtSessionStartWithoutMargin) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  auto audio = MultichannelAudio::Zeros(2, 16000, 16000);
  for (Eigen::Index i = 0; i < audio.samples.size(); ++i) audio.samples.data()[i] = n(rng);
  const Turn turn{"a", 0.0, 0.5};
  const auto act = fusion::Rasterize({"s", {turn}}, {"a"}, 0.01, 100);
  GssConfig cfg;
  cfg.context_margin = 0.0;
  cfg.wpe_enabled = false;
  cfg.stft = StftParams{512, 128};
  const auto res = ExtractSpeakerSegment(audio, turn, act, cfg);
  EXPECT_EQ(res.start_sample, 0);
  EXPECT_EQ(res.waveform.size(), 8000);
  EXPECT_TRUE(res.waveform.allFinite());
}

TEST(GssConfig, RejectsBadValues) {
  GssConfig cfg;
  cfg.iterations = 0;
  EXPECT_THROW(cfg.Validate(), std::exception);
  cfg = {};
  cfg.context_margin = -1.0;
  EXPECT_THROW(cfg.Validate(), std::exception);
}

}  // namespace
}  // namespace farfield::gss
