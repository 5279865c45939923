#include "tvbench/quality_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include <tbb/parallel_for.h>

#include "tvbench/error.hpp"

namespace tvbench {
namespace {

void check_pair(const FrameSequence& gt, const FrameSequence& pred, std::size_t min_frames,
                const char* what) {
  validate(gt);
  validate(pred);
  if (gt.size() != pred.size() || gt.width() != pred.width() || gt.height() != pred.height()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + ": GT is " + std::to_string(gt.size()) + "x" +
                    std::to_string(gt.width()) + "x" + std::to_string(gt.height()) +
                    ", prediction " + std::to_string(pred.size()) + "x" +
                    std::to_string(pred.width()) + "x" + std::to_string(pred.height()));
  }
  if (gt.size() < min_frames) {
    throw Error(ErrorCode::kInsufficientData, std::string(what) + ": needs at least " +
                                                  std::to_string(min_frames) + " frames");
  }
}

void check_mask(const FrameSequence& seq, const DenseMaskSequence& mask, const char* what) {
  if (mask.size() != seq.size()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": mask covers " +
                                               std::to_string(mask.size()) + " frames, clip has " +
                                               std::to_string(seq.size()));
  }
  const std::size_t pixels = static_cast<std::size_t>(seq.width()) * seq.height();
  for (const auto& m : mask) {
    if (m.size() != pixels) throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": mask size");
  }
}

/// Row-major view of mask frame t, or the whole frame when `mask` is null.
PixelMask mask_at(const DenseMaskSequence* mask, std::size_t t) {
  if (mask == nullptr) return {};
  return PixelMask((*mask)[t]);
}

/// fn(i) for i in [0, n); results are written by index so reductions stay
/// ordered.
template <typename Fn>
void for_each_index(std::size_t n, Fn&& fn) {
  tbb::parallel_for(std::size_t{0}, n, [&](std::size_t i) { fn(i); });
}

struct Partial {
  double value = 0.0;
  bool used = false;
};

/// Mean of the used entries, nullopt if none.
std::optional<double> mean_of(const std::vector<Partial>& parts) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const Partial& p : parts) {
    if (!p.used) continue;
    sum += p.value;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> l1_impl(const FrameSequence& gt, const FrameSequence& pred,
                              const DenseMaskSequence* mask) {
  const std::size_t T = gt.size();
  std::vector<std::uint64_t> sums(T, 0), counts(T, 0);
  for_each_index(T, [&](std::size_t t) {
    const Frame& a = gt.frames[t];
    const Frame& b = pred.frames[t];
    const PixelMask m = mask_at(mask, t);
    std::uint64_t s = 0, n = 0;
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      if (!m.empty() && m[i] == 0) continue;
      for (int c = 0; c < 3; ++c) s += std::abs(int(a.rgb[i * 3 + c]) - int(b.rgb[i * 3 + c]));
      n += 3;
    }
    sums[t] = s;
    counts[t] = n;
  });
  std::uint64_t s = 0, n = 0;
  for (std::size_t t = 0; t < T; ++t) {
    s += sums[t];
    n += counts[t];
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(s) / static_cast<double>(n);
}

std::optional<double> psnr_impl(const FrameSequence& gt, const FrameSequence& pred,
                                const DenseMaskSequence* mask) {
  const std::size_t T = gt.size();
  std::vector<Partial> parts(T);
  for_each_index(T, [&](std::size_t t) {
    const Frame& a = gt.frames[t];
    const Frame& b = pred.frames[t];
    const PixelMask m = mask_at(mask, t);
    std::uint64_t s = 0, n = 0;
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      if (!m.empty() && m[i] == 0) continue;
      for (int c = 0; c < 3; ++c) {
        const std::int64_t d = int(a.rgb[i * 3 + c]) - int(b.rgb[i * 3 + c]);
        s += static_cast<std::uint64_t>(d * d);
      }
      n += 3;
    }
    if (n == 0) return;
    const double mse = static_cast<double>(s) / static_cast<double>(n);
    parts[t].value = mse == 0.0 ? kPsnrCap : std::min(kPsnrCap, 20.0 * std::log10(255.0 / std::sqrt(mse)));
    parts[t].used = true;
  });
  return mean_of(parts);
}

std::optional<double> ssim_impl(const FrameSequence& gt, const FrameSequence& pred,
                                const DenseMaskSequence* mask, const SsimParams& params) {
  const std::size_t T = gt.size();
  std::vector<Partial> parts(T * 3);
  const int offset = params.window / 2;
  for_each_index(T * 3, [&](std::size_t k) {
    const std::size_t t = k / 3;
    const int c = static_cast<int>(k % 3);
    const PixelMask m = mask_at(mask, t);
    const Plane a = channel_plane(gt.frames[t], c, m);
    const Plane b = channel_plane(pred.frames[t], c, m);
    const Plane map = ssim_map(a, b, params);
    parts[k].used = masked_mean(map, offset, a.width, m, parts[k].value);
  });
  return mean_of(parts);
}

std::optional<double> st_ssim_impl(const FrameSequence& gt, const FrameSequence& pred,
                                   const DenseMaskSequence* mask, const SsimParams& params) {
  const std::size_t w = static_cast<std::size_t>(params.temporal_window);
  const std::size_t blocks = gt.size() - w + 1;
  std::vector<Partial> parts(blocks * 3);
  const int offset = params.window / 2;
  for_each_index(blocks * 3, [&](std::size_t k) {
    const std::size_t t = k / 3;
    const int c = static_cast<int>(k % 3);
    std::vector<Plane> a, b;
    for (std::size_t i = 0; i < w; ++i) {
      a.push_back(channel_plane(gt.frames[t + i], c, mask_at(mask, t + i)));
      b.push_back(channel_plane(pred.frames[t + i], c, mask_at(mask, t + i)));
    }
    const Plane map = ssim_map_3d(a, b, params);
    parts[k].used = masked_mean(map, offset, a.front().width, mask_at(mask, t + w / 2), parts[k].value);
  });
  return mean_of(parts);
}

std::optional<double> gmsd_impl(const FrameSequence& gt, const FrameSequence& pred,
                                const DenseMaskSequence* mask) {
  const std::size_t T = gt.size();
  std::vector<Partial> parts(T - 1);
  for_each_index(T - 1, [&](std::size_t k) {
    const std::size_t t = k + 1;
    const PixelMask m = mask_at(mask, t);
    const Plane ga = prewitt_magnitude(luma_plane(gt.frames[t], m));
    const Plane gb = prewitt_magnitude(luma_plane(pred.frames[t], m));
    Plane gms(ga.width, ga.height);
    for (std::size_t i = 0; i < gms.data.size(); ++i) {
      const double x = ga.data[i], y = gb.data[i];
      gms.data[i] = (2.0 * x * y + kGmsEpsilon) / (x * x + y * y + kGmsEpsilon);
    }
    double mean = 0.0;
    if (!masked_mean(gms, 1, gt.width(), m, mean)) return;
    for (double& v : gms.data) v = (v - mean) * (v - mean);
    masked_mean(gms, 1, gt.width(), m, parts[k].value);
    parts[k].used = true;
  });
  const auto var = mean_of(parts);
  if (!var) return std::nullopt;
  return std::sqrt(*var);
}

double require(std::optional<double> v, const char* what) {
  if (!v) throw Error(ErrorCode::kInsufficientData, std::string(what) + ": nothing to average");
  return *v;
}

void check_temporal(const SsimParams& params) {
  if (params.temporal_window < 1 || params.temporal_window % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "st_ssim: temporal window must be odd and positive");
  }
}

}  // namespace

double l1(const FrameSequence& gt, const FrameSequence& pred) {
  check_pair(gt, pred, 1, "l1");
  return require(l1_impl(gt, pred, nullptr), "l1");
}

double psnr(const FrameSequence& gt, const FrameSequence& pred) {
  check_pair(gt, pred, 1, "psnr");
  return require(psnr_impl(gt, pred, nullptr), "psnr");
}

double ssim(const FrameSequence& gt, const FrameSequence& pred, const SsimParams& params) {
  check_pair(gt, pred, 1, "ssim");
  return require(ssim_impl(gt, pred, nullptr, params), "ssim");
}

double st_ssim(const FrameSequence& gt, const FrameSequence& pred, const SsimParams& params) {
  check_temporal(params);
  check_pair(gt, pred, static_cast<std::size_t>(params.temporal_window), "st_ssim");
  return require(st_ssim_impl(gt, pred, nullptr, params), "st_ssim");
}

double gmsd_temporal(const FrameSequence& gt, const FrameSequence& pred) {
  check_pair(gt, pred, 2, "gmsd_temporal");
  return require(gmsd_impl(gt, pred, nullptr), "gmsd_temporal");
}

std::optional<double> masked_l1(const FrameSequence& gt, const FrameSequence& pred,
                                const DenseMaskSequence& mask) {
  check_pair(gt, pred, 1, "l1");
  check_mask(gt, mask, "l1");
  return l1_impl(gt, pred, &mask);
}

std::optional<double> masked_psnr(const FrameSequence& gt, const FrameSequence& pred,
                                  const DenseMaskSequence& mask) {
  check_pair(gt, pred, 1, "psnr");
  check_mask(gt, mask, "psnr");
  return psnr_impl(gt, pred, &mask);
}

std::optional<double> masked_ssim(const FrameSequence& gt, const FrameSequence& pred,
                                  const DenseMaskSequence& mask, const SsimParams& params) {
  check_pair(gt, pred, 1, "ssim");
  check_mask(gt, mask, "ssim");
  return ssim_impl(gt, pred, &mask, params);
}

std::optional<double> masked_st_ssim(const FrameSequence& gt, const FrameSequence& pred,
                                     const DenseMaskSequence& mask, const SsimParams& params) {
  check_temporal(params);
  check_pair(gt, pred, static_cast<std::size_t>(params.temporal_window), "st_ssim");
  check_mask(gt, mask, "st_ssim");
  return st_ssim_impl(gt, pred, &mask, params);
}

std::optional<double> masked_gmsd_temporal(const FrameSequence& gt, const FrameSequence& pred,
                                           const DenseMaskSequence& mask) {
  check_pair(gt, pred, 2, "gmsd_temporal");
  check_mask(gt, mask, "gmsd_temporal");
  return gmsd_impl(gt, pred, &mask);
}

std::optional<PersonAverage> average_over_persons(std::span<const std::optional<double>> values) {
  PersonAverage out;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++out.used;
    } else {
      ++out.skipped;
    }
  }
  if (out.used == 0) return std::nullopt;
  out.value = sum / static_cast<double>(out.used);
  return out;
}

GaussianAccumulator accumulate(const FeatureSet& features) {
  GaussianAccumulator acc(features.dim());
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    const Eigen::VectorXd row = features.vectors.row(i).transpose();
    acc.add(row);
  }
  return acc;
}

double frechet_distance(const FeatureSet& real, const FeatureSet& fake) {
  if (real.dim() != fake.dim()) {
    throw Error(ErrorCode::kShapeMismatch, "frechet_distance: feature dimensions " +
                                               std::to_string(real.dim()) + " and " +
                                               std::to_string(fake.dim()));
  }
  return frechet_distance(accumulate(real).summary(), accumulate(fake).summary());
}

double clip_score(const FeatureSet& gt, const FeatureSet& pred) {
  if (gt.size() != pred.size() || gt.dim() != pred.dim()) {
    throw Error(ErrorCode::kShapeMismatch, "clip_score: embedding sets differ in shape");
  }
  if (gt.size() == 0) throw Error(ErrorCode::kInsufficientData, "clip_score: no embeddings");
  double sum = 0.0;
  for (Eigen::Index t = 0; t < gt.size(); ++t) {
    const double na = gt.vectors.row(t).norm();
    const double nb = pred.vectors.row(t).norm();
    if (na == 0.0 || nb == 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "clip_score: zero-norm embedding at frame " + std::to_string(t));
    }
    sum += gt.vectors.row(t).dot(pred.vectors.row(t)) / (na * nb);
  }
  return sum / static_cast<double>(gt.size());
}

namespace {

void check_layers(const LayerFeatureMaps& a, const LayerFeatureMaps& b, const char* what) {
  if (a.layers.empty() || a.layers.size() != b.layers.size()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": layer counts " +
                                               std::to_string(a.layers.size()) + " and " +
                                               std::to_string(b.layers.size()));
  }
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const FeatureLayer& x = a.layers[l];
    const FeatureLayer& y = b.layers[l];
    if (x.channels != y.channels || x.height != y.height || x.width != y.width) {
      throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": layer " + std::to_string(l) + " shape differs");
    }
  }
}

}  // namespace

double lpips_from_features(const LayerFeatureMaps& gt, const LayerFeatureMaps& pred) {
  check_layers(gt, pred, "lpips");
  double total = 0.0;
  for (std::size_t l = 0; l < gt.layers.size(); ++l) {
    const FeatureLayer& a = gt.layers[l];
    const FeatureLayer& b = pred.layers[l];
    double layer_sum = 0.0;
    for (int h = 0; h < a.height; ++h) {
      for (int w = 0; w < a.width; ++w) {
        double na = 0.0, nb = 0.0;
        for (int c = 0; c < a.channels; ++c) {
          na += a.at(c, h, w) * a.at(c, h, w);
          nb += b.at(c, h, w) * b.at(c, h, w);
        }
        na = std::sqrt(na);
        nb = std::sqrt(nb);
        for (int c = 0; c < a.channels; ++c) {
          const double xa = na > 0.0 ? a.at(c, h, w) / na : 0.0;
          const double xb = nb > 0.0 ? b.at(c, h, w) / nb : 0.0;
          layer_sum += std::abs(a.weights[c] * (xa - xb));
        }
      }
    }
    total += layer_sum / (static_cast<double>(a.height) * a.width);
  }
  return total / static_cast<double>(gt.layers.size());
}

DistsLayerTerms dists_layer_terms(const FeatureLayer& a, const FeatureLayer& b) {
  const std::size_t n = a.values.size();
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "dists: zero-norm feature tensor");
  }
  DistsLayerTerms out;
  out.structure = dot / (std::sqrt(na) * std::sqrt(nb));

  const Eigen::Index C = a.channels;
  const Eigen::Index HW = static_cast<Eigen::Index>(a.height) * a.width;
  const Eigen::MatrixXd fa = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(a.values.data(), C, HW);
  const Eigen::MatrixXd fb = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(b.values.data(), C, HW);
  const Eigen::MatrixXd ga = fa * fa.transpose() / static_cast<double>(HW);
  const Eigen::MatrixXd gb = fb * fb.transpose() / static_cast<double>(HW);
  out.texture = (ga - gb).squaredNorm() / static_cast<double>(C * C);
  return out;
}

double dists_from_features(const LayerFeatureMaps& gt, const LayerFeatureMaps& pred) {
  check_layers(gt, pred, "dists");
  double total = 0.0;
  for (std::size_t l = 0; l < gt.layers.size(); ++l) {
    const DistsLayerTerms terms = dists_layer_terms(gt.layers[l], pred.layers[l]);
    total += 0.5 * terms.structure + 0.5 * (1.0 - terms.texture);
  }
  return total / static_cast<double>(gt.layers.size());
}

}  // namespace tvbench
