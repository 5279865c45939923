#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tvbench/gaussian.hpp"
#include "tvbench/image.hpp"

namespace tvbench {

/// One person's foreground over a clip: masks[t] is a row-major 0/1 buffer of
/// width × height entries.
using DenseMaskSequence = std::vector<std::vector<std::uint8_t>>;

inline constexpr double kPsnrCap = 100.0;
inline constexpr double kGmsEpsilon = 170.0;

// Full-frame metrics. Both sequences must have the same shape.
double l1(const FrameSequence& gt, const FrameSequence& pred);
double psnr(const FrameSequence& gt, const FrameSequence& pred);
double ssim(const FrameSequence& gt, const FrameSequence& pred, const SsimParams& params = {});
double st_ssim(const FrameSequence& gt, const FrameSequence& pred, const SsimParams& params = {});
double gmsd_temporal(const FrameSequence& gt, const FrameSequence& pred);

// Single-person masked variants: frames are multiplied by the mask and
// averaged over foreground only. nullopt when the mask never selects
// anything the metric can use.
std::optional<double> masked_l1(const FrameSequence& gt, const FrameSequence& pred,
                                const DenseMaskSequence& mask);
std::optional<double> masked_psnr(const FrameSequence& gt, const FrameSequence& pred,
                                  const DenseMaskSequence& mask);
std::optional<double> masked_ssim(const FrameSequence& gt, const FrameSequence& pred,
                                  const DenseMaskSequence& mask, const SsimParams& params = {});
std::optional<double> masked_st_ssim(const FrameSequence& gt, const FrameSequence& pred,
                                     const DenseMaskSequence& mask, const SsimParams& params = {});
std::optional<double> masked_gmsd_temporal(const FrameSequence& gt, const FrameSequence& pred,
                                           const DenseMaskSequence& mask);

struct PersonAverage {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

/// Arithmetic mean of the per-person values that exist. nullopt if none do.
std::optional<PersonAverage> average_over_persons(std::span<const std::optional<double>> values);

/// N feature vectors of one dimension (one per row).
struct FeatureSet {
  std::string tag;
  Eigen::MatrixXd vectors;

  Eigen::Index size() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
};

GaussianAccumulator accumulate(const FeatureSet& features);

/// Fréchet distance between the Gaussians fitted to two feature sets.
double frechet_distance(const FeatureSet& real, const FeatureSet& fake);

/// Mean frame-wise cosine similarity of paired embeddings.
double clip_score(const FeatureSet& gt, const FeatureSet& pred);

struct FeatureLayer {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> weights;  ///< one per channel
  std::vector<double> values;   ///< (c, h, w) order

  double at(int c, int h, int w) const {
    return values[(static_cast<std::size_t>(c) * height + h) * width + w];
  }
};

/// Layer activations of one image.
struct LayerFeatureMaps {
  std::vector<FeatureLayer> layers;
};

/// Weighted L1 distance between unit-normalised channel vectors, averaged
/// over positions and layers. Weights are taken from `gt`.
double lpips_from_features(const LayerFeatureMaps& gt, const LayerFeatureMaps& pred);

/// Structure and texture terms of one layer.
struct DistsLayerTerms {
  double structure = 0.0;
  double texture = 0.0;
};

DistsLayerTerms dists_layer_terms(const FeatureLayer& gt, const FeatureLayer& pred);

/// Mean over layers of 0.5·structure + 0.5·(1 − texture); 1 for identical
/// features.
double dists_from_features(const LayerFeatureMaps& gt, const LayerFeatureMaps& pred);

}  // namespace tvbench
