#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "support.hpp"
#include "tvbench/error.hpp"
#include "tvbench/gaussian.hpp"
#include "tvbench/quality_metrics.hpp"

using namespace tvbench;

namespace {

DenseMaskSequence full_mask(const FrameSequence& s) {
  return DenseMaskSequence(s.size(), std::vector<std::uint8_t>(s.frames[0].pixel_count(), 1));
}

DenseMaskSequence random_mask(Rng& rng, const FrameSequence& s, double p) {
  DenseMaskSequence m(s.size(), std::vector<std::uint8_t>(s.frames[0].pixel_count()));
  for (auto& f : m) {
    for (auto& v : f) v = rng.uniform() < p;
  }
  return m;
}

std::vector<double> taps(int n, double sigma) {
  std::vector<double> g(n);
  double s = 0;
  for (int i = 0; i < n; ++i) s += g[i] = std::exp(-std::pow(i - n / 2, 2) / (2 * sigma * sigma));
  for (auto& v : g) v /= s;
  return g;
}

// Windowed SSIM at one position from explicitly weighted sums over a
// (depth × 11 × 11) block.
double ssim_at(const std::vector<Plane>& a, const std::vector<Plane>& b, int x0, int y0, double range) {
  const auto g = taps(11, 1.5);
  const auto gt = taps(static_cast<int>(a.size()), 1.5);
  long double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (int j = 0; j < 11; ++j) {
      for (int i = 0; i < 11; ++i) {
        const long double w = gt[t] * g[i] * g[j];
        const long double u = a[t].at(x0 + i, y0 + j), v = b[t].at(x0 + i, y0 + j);
        ma += w * u;
        mb += w * v;
        saa += w * u * u;
        sbb += w * v * v;
        sab += w * u * v;
      }
    }
  }
  const long double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  const long double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
  return static_cast<double>((2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2)));
}

Plane random_plane(Rng& rng, int w, int h) {
  Plane p(w, h);
  for (auto& v : p.data) v = static_cast<double>(rng.integer(0, 255));
  return p;
}

}  // namespace

// -------------------------------------------------------------- L1 / PSNR

TEST(PixelMetrics, HandValues) {
  FrameSequence a, b;
  Frame f{2, 1, {0, 0, 0, 10, 10, 10}};
  Frame g{2, 1, {3, 0, 0, 10, 10, 13}};
  a.frames = {f};
  b.frames = {g};
  EXPECT_DOUBLE_EQ(l1(a, b), 1.0);
  EXPECT_NEAR(psnr(a, b), 20 * std::log10(255.0 / std::sqrt(3.0)), 1e-12);
  EXPECT_DOUBLE_EQ(psnr(a, a), kPsnrCap);
  EXPECT_DOUBLE_EQ(l1(a, a), 0.0);
}

TEST(PixelMetrics, PsnrAveragesFrames) {
  Rng rng(81);
  const FrameSequence a = tvtest::random_frames(rng, 4, 16, 12);
  const FrameSequence b = tvtest::jitter(a, rng, 20);
  double want = 0;
  for (std::size_t t = 0; t < 4; ++t) {
    double se = 0;
    for (std::size_t i = 0; i < a.frames[t].rgb.size(); ++i) se += std::pow(a.frames[t].rgb[i] - b.frames[t].rgb[i], 2);
    want += 20 * std::log10(255 / std::sqrt(se / a.frames[t].rgb.size())) / 4;
  }
  EXPECT_NEAR(psnr(a, b), want, 1e-10);
}

TEST(PixelMetrics, ShapeErrors) {
  Rng rng(82);
  const FrameSequence a = tvtest::random_frames(rng, 3, 16, 12);
  const FrameSequence b = tvtest::random_frames(rng, 2, 16, 12);
  try {
    l1(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

// ------------------------------------------------------------------- SSIM

TEST(Ssim, MapMatchesWindowedOracle) {
  Rng rng(91);
  for (int trial = 0; trial < 5; ++trial) {
    const Plane a = random_plane(rng, 23, 17), b = random_plane(rng, 23, 17);
    const Plane map = ssim_map(a, b);
    ASSERT_EQ(map.width, 13);
    ASSERT_EQ(map.height, 7);
    for (int y = 0; y < map.height; ++y) {
      for (int x = 0; x < map.width; ++x) EXPECT_NEAR(map.at(x, y), ssim_at({a}, {b}, x, y, 255), 1e-10);
    }
  }
}

TEST(Ssim, VolumetricMapMatchesOracle) {
  Rng rng(92);
  std::vector<Plane> a, b;
  for (int t = 0; t < 3; ++t) {
    a.push_back(random_plane(rng, 15, 14));
    b.push_back(random_plane(rng, 15, 14));
  }
  const Plane map = ssim_map_3d(a, b);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) EXPECT_NEAR(map.at(x, y), ssim_at(a, b, x, y, 255), 1e-10);
  }
}

TEST(Ssim, ClipValueIsMeanOverFramesAndChannels) {
  Rng rng(93);
  const FrameSequence a = tvtest::random_frames(rng, 2, 14, 13);
  const FrameSequence b = tvtest::jitter(a, rng, 40);
  double want = 0;
  for (std::size_t t = 0; t < 2; ++t) {
    for (int c = 0; c < 3; ++c) {
      const Plane pa = channel_plane(a.frames[t], c), pb = channel_plane(b.frames[t], c);
      double s = 0;
      for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 4; ++x) s += ssim_at({pa}, {pb}, x, y, 255);
      }
      want += s / 12 / 6;
    }
  }
  EXPECT_NEAR(ssim(a, b), want, 1e-10);
  EXPECT_DOUBLE_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, SpatioTemporalBlocks) {
  Rng rng(94);
  const FrameSequence a = tvtest::random_frames(rng, 5, 12, 12);
  const FrameSequence b = tvtest::jitter(a, rng, 30);
  double want = 0;
  for (std::size_t t = 0; t + 3 <= 5; ++t) {
    for (int c = 0; c < 3; ++c) {
      std::vector<Plane> pa, pb;
      for (std::size_t k = 0; k < 3; ++k) {
        pa.push_back(channel_plane(a.frames[t + k], c));
        pb.push_back(channel_plane(b.frames[t + k], c));
      }
      double s = 0;
      for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 2; ++x) s += ssim_at(pa, pb, x, y, 255);
      }
      want += s / 4 / 9;
    }
  }
  EXPECT_NEAR(st_ssim(a, b), want, 1e-10);
  EXPECT_THROW(st_ssim(FrameSequence{{a.frames[0], a.frames[1]}}, FrameSequence{{a.frames[0], a.frames[1]}}), Error);
}

TEST(Ssim, TooSmall) { EXPECT_THROW(ssim_map(Plane(10, 20), Plane(10, 20)), Error); }

// ------------------------------------------------------------------- GMSD

TEST(Gmsd, MatchesDirectComputation) {
  Rng rng(95);
  const FrameSequence a = tvtest::random_frames(rng, 4, 9, 8);
  const FrameSequence b = tvtest::jitter(a, rng, 50);
  auto grad = [](const Frame& f, int x, int y) {
    auto L = [&](int u, int v) { return 0.299 * f.at(u, v, 0) + 0.587 * f.at(u, v, 1) + 0.114 * f.at(u, v, 2); };
    double gx = 0, gy = 0;
    for (int k = -1; k <= 1; ++k) {
      gx += L(x + 1, y + k) - L(x - 1, y + k);
      gy += L(x + k, y + 1) - L(x + k, y - 1);
    }
    return std::hypot(gx / 3, gy / 3);
  };
  double var_sum = 0;
  for (std::size_t t = 1; t < 4; ++t) {
    std::vector<double> gms;
    for (int y = 1; y < 7; ++y) {
      for (int x = 1; x < 8; ++x) {
        const double g = grad(a.frames[t], x, y), h = grad(b.frames[t], x, y);
        gms.push_back((2 * g * h + 170) / (g * g + h * h + 170));
      }
    }
    double m = 0, v = 0;
    for (double s : gms) m += s / gms.size();
    for (double s : gms) v += (s - m) * (s - m) / gms.size();
    var_sum += v;
  }
  EXPECT_NEAR(gmsd_temporal(a, b), std::sqrt(var_sum / 3), 1e-12);
  EXPECT_DOUBLE_EQ(gmsd_temporal(a, a), 0.0);
}

// ---------------------------------------------------------------- masking

TEST(Masked, AllForegroundEqualsFullFrame) {
  Rng rng(96);
  for (int trial = 0; trial < 10; ++trial) {
    const FrameSequence a = tvtest::random_frames(rng, 4, 16, 14);
    const FrameSequence b = tvtest::jitter(a, rng, 25);
    const auto m = full_mask(a);
    EXPECT_NEAR(*masked_l1(a, b, m), l1(a, b), 1e-10);
    EXPECT_NEAR(*masked_psnr(a, b, m), psnr(a, b), 1e-10);
    EXPECT_NEAR(*masked_ssim(a, b, m), ssim(a, b), 1e-10);
    EXPECT_NEAR(*masked_st_ssim(a, b, m), st_ssim(a, b), 1e-10);
    EXPECT_NEAR(*masked_gmsd_temporal(a, b, m), gmsd_temporal(a, b), 1e-10);
  }
}

TEST(Masked, L1CountsForegroundOnly) {
  Rng rng(97);
  const FrameSequence a = tvtest::random_frames(rng, 3, 10, 10);
  const FrameSequence b = tvtest::jitter(a, rng, 30);
  const auto m = random_mask(rng, a, 0.3);
  double s = 0, n = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t i = 0; i < 100; ++i) {
      if (!m[t][i]) continue;
      for (int c = 0; c < 3; ++c) s += std::abs(a.frames[t].rgb[i * 3 + c] - b.frames[t].rgb[i * 3 + c]);
      n += 3;
    }
  }
  EXPECT_NEAR(*masked_l1(a, b, m), s / n, 1e-12);
}

TEST(Masked, BackgroundChangesAreIgnored) {
  Rng rng(98);
  const FrameSequence a = tvtest::random_frames(rng, 3, 20, 20);
  DenseMaskSequence m(3, std::vector<std::uint8_t>(400, 0));
  for (auto& f : m) {
    for (int y = 5; y < 15; ++y) {
      for (int x = 5; x < 15; ++x) f[y * 20 + x] = 1;
    }
  }
  FrameSequence b = a;
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t i = 0; i < 400; ++i) {
      if (!m[t][i]) b.frames[t].rgb[i * 3] = static_cast<std::uint8_t>(255 - b.frames[t].rgb[i * 3]);
    }
  }
  EXPECT_DOUBLE_EQ(*masked_l1(a, b, m), 0.0);
  EXPECT_DOUBLE_EQ(*masked_psnr(a, b, m), kPsnrCap);
  EXPECT_NEAR(*masked_ssim(a, b, m), 1.0, 1e-12);
  EXPECT_GT(l1(a, b), 0.0);
}

TEST(Masked, EmptyMaskGivesNothing) {
  Rng rng(99);
  const FrameSequence a = tvtest::random_frames(rng, 3, 12, 12);
  DenseMaskSequence m(3, std::vector<std::uint8_t>(144, 0));
  EXPECT_FALSE(masked_l1(a, a, m).has_value());
  EXPECT_FALSE(masked_ssim(a, a, m).has_value());
  EXPECT_THROW(masked_l1(a, a, DenseMaskSequence(2, std::vector<std::uint8_t>(144, 1))), Error);
}

TEST(Masked, PersonAverage) {
  const std::vector<std::optional<double>> v{2.0, std::nullopt, 4.0};
  const auto r = average_over_persons(v);
  ASSERT_TRUE(r);
  EXPECT_DOUBLE_EQ(r->value, 3.0);
  EXPECT_EQ(r->used, 2u);
  EXPECT_EQ(r->skipped, 1u);
  const std::vector<std::optional<double>> none{std::nullopt};
  EXPECT_FALSE(average_over_persons(none));
}

// ---------------------------------------------------------------- Fréchet

namespace {

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// ‖μa − μb‖² + Tr Σa + Tr Σb − 2 Σ sqrt(λ(Σa Σb)), eigenvalues of the
// non-symmetric product in extended precision.
long double frechet_oracle(const GaussianSummary& a, const GaussianSummary& b) {
  const MatL sa = a.cov.cast<long double>(), sb = b.cov.cast<long double>();
  const MatL prod = sa * sb;
  Eigen::EigenSolver<MatL> es(prod, false);
  long double tr_sqrt = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) tr_sqrt += std::sqrt(std::max<long double>(0, es.eigenvalues()[i].real()));
  const long double dm = (a.mean - b.mean).cast<long double>().squaredNorm();
  return dm + sa.trace() + sb.trace() - 2 * tr_sqrt;
}

GaussianSummary random_gaussian(Rng& rng, int d) {
  GaussianSummary g;
  g.mean = Eigen::VectorXd(d);
  for (int i = 0; i < d; ++i) g.mean[i] = rng.normal();
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d * d; ++i) a.data()[i] = rng.normal();
  g.cov = a * a.transpose() / d + 0.01 * Eigen::MatrixXd::Identity(d, d);
  g.count = 100;
  return g;
}

}  // namespace

TEST(Frechet, MatchesExtendedPrecisionOracle) {
  Rng rng(111);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = static_cast<int>(rng.integer(1, 16));
    const GaussianSummary a = random_gaussian(rng, d), b = random_gaussian(rng, d);
    const double got = frechet_distance(a, b);
    const double want = static_cast<double>(frechet_oracle(a, b));
    EXPECT_NEAR(got, want, 1e-6 * std::abs(want));
    EXPECT_NEAR(got, frechet_distance(b, a), 1e-9 * std::abs(want));
    EXPECT_GE(got, 0.0);
  }
}

TEST(Frechet, TwoDimensionalClosedForm) {
  Rng rng(112);
  for (int trial = 0; trial < 100; ++trial) {
    const GaussianSummary a = random_gaussian(rng, 2), b = random_gaussian(rng, 2);
    EXPECT_NEAR(frechet_distance_2d(a, b), frechet_distance(a, b), 1e-9 * (1 + frechet_distance(a, b)));
  }
}

TEST(Frechet, IdenticalIsZero) {
  Rng rng(113);
  FeatureSet f;
  f.vectors = Eigen::MatrixXd(40, 8);
  for (Eigen::Index i = 0; i < f.vectors.size(); ++i) f.vectors.data()[i] = rng.normal();
  EXPECT_NEAR(frechet_distance(f, f), 0.0, 1e-10);
  FeatureSet g = f;
  g.vectors.array() += 1.0;
  EXPECT_NEAR(frechet_distance(f, g), 8.0, 1e-9);
}

TEST(Gaussian, AccumulatorMergeAndMoments) {
  Rng rng(114);
  Eigen::MatrixXd x(50, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal() * 3 + 1;
  GaussianAccumulator all(3), left(3), right(3);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd r = x.row(i).transpose();
    all.add(r);
    (i < 17 ? left : right).add(r);
  }
  left.merge(right);
  const GaussianSummary s = all.summary(), m = left.summary();
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centred.transpose() * centred / 49.0;
  EXPECT_LT((s.mean - mean).norm(), 1e-12);
  EXPECT_LT((s.cov - cov).norm(), 1e-10);
  EXPECT_LT((m.cov - cov).norm(), 1e-10);
  GaussianAccumulator one(3);
  one.add(Eigen::VectorXd::Ones(3));
  EXPECT_THROW(one.summary(), Error);
}

// ------------------------------------------------------- feature metrics

TEST(ClipScore, CosineAndScaleInvariance) {
  FeatureSet a, b;
  a.vectors = Eigen::MatrixXd{{1, 0}, {0, 1}};
  b.vectors = Eigen::MatrixXd{{1, 1}, {0, -3}};
  EXPECT_NEAR(clip_score(a, b), (std::sqrt(0.5) - 1.0) / 2.0, 1e-15);
  FeatureSet c = b;
  c.vectors.row(0) *= 7.0;
  c.vectors.row(1) *= 0.1;
  EXPECT_NEAR(clip_score(a, c), clip_score(a, b), 1e-15);
  b.vectors.row(1).setZero();
  EXPECT_THROW(clip_score(a, b), Error);
}

namespace {

FeatureLayer layer(int c, int h, int w, std::vector<double> weights, std::vector<double> values) {
  return FeatureLayer{c, h, w, std::move(weights), std::move(values)};
}

}  // namespace

TEST(Lpips, HandValue) {
  // One position, two channels: (3, 4)/5 vs (0, 2)/2, weights (1, 2):
  // |0.6 − 0| + 2·|0.8 − 1| = 1.0. Second layer: zero vector vs (1, 0).
  LayerFeatureMaps gt{{layer(2, 1, 1, {1, 2}, {3, 4}), layer(2, 1, 1, {0.4, 1}, {0, 0})}};
  LayerFeatureMaps pred{{layer(2, 1, 1, {9, 9}, {0, 2}), layer(2, 1, 1, {9, 9}, {5, 0})}};
  // Layer 2: |0.4·(0 − 1)| + |1·(0 − 0)| = 0.4; mean of 1.0 and 0.4.
  EXPECT_NEAR(lpips_from_features(gt, pred), 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(lpips_from_features(gt, gt), 0.0);
}

TEST(Lpips, AveragesPositions) {
  LayerFeatureMaps gt{{layer(1, 1, 2, {1.5}, {1, 1})}};
  LayerFeatureMaps pred{{layer(1, 1, 2, {1.5}, {1, -1})}};
  // Unit-normalised single channels: 1 vs 1 and 1 vs −1, so (0 + 3) / 2.
  EXPECT_NEAR(lpips_from_features(gt, pred), 1.5, 1e-15);
  LayerFeatureMaps other{{layer(1, 2, 1, {1.5}, {1, 1})}};
  EXPECT_THROW(lpips_from_features(gt, other), Error);
}

TEST(Dists, ScalarLayer) {
  // One value per tensor: structure = 1, Gram = value², texture = (4 − 1)².
  LayerFeatureMaps gt{{layer(1, 1, 1, {}, {2})}};
  LayerFeatureMaps pred{{layer(1, 1, 1, {}, {1})}};
  const auto terms = dists_layer_terms(gt.layers[0], pred.layers[0]);
  EXPECT_DOUBLE_EQ(terms.structure, 1.0);
  EXPECT_DOUBLE_EQ(terms.texture, 9.0);
  EXPECT_DOUBLE_EQ(dists_from_features(gt, pred), 0.5 + 0.5 * (1 - 9.0));
  EXPECT_DOUBLE_EQ(dists_from_features(gt, gt), 1.0);
}

TEST(Dists, GramTexture) {
  // Two channels over two positions: F = [[1, 0], [0, 1]] vs [[1, 1], [0, 0]].
  const FeatureLayer a = layer(2, 1, 2, {}, {1, 0, 0, 1});
  const FeatureLayer b = layer(2, 1, 2, {}, {1, 1, 0, 0});
  // Ga = I/2, Gb = [[1, 0], [0, 0]]; squared differences 0.25, 0, 0, 0.25.
  const auto t = dists_layer_terms(a, b);
  EXPECT_DOUBLE_EQ(t.texture, 0.125);
  EXPECT_NEAR(t.structure, 1.0 / (std::sqrt(2.0) * std::sqrt(2.0)), 1e-15);
  const FeatureLayer zero = layer(2, 1, 2, {}, {0, 0, 0, 0});
  EXPECT_THROW(dists_layer_terms(a, zero), Error);
}
