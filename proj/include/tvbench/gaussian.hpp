#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace tvbench {

/// Sample mean and unbiased (N−1) covariance of a point cloud.
struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t count = 0;

  Eigen::Index dim() const { return mean.size(); }
};

/// Streaming mean/scatter accumulator. merge() is the pairwise update of
/// Chan et al., so partial accumulators can be combined in any grouping; a
/// fixed merge order gives bit-identical results.
class GaussianAccumulator {
 public:
  GaussianAccumulator() = default;
  explicit GaussianAccumulator(Eigen::Index dim);

  void add(std::span<const double> sample);
  void add(const Eigen::Ref<const Eigen::VectorXd>& sample);
  void merge(const GaussianAccumulator& other);

  std::size_t count() const { return count_; }
  Eigen::Index dim() const { return mean_.size(); }

  /// Throws kInsufficientData with fewer than two samples.
  GaussianSummary summary() const;

 private:
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd scatter_;
};

/// ‖μa − μb‖² + Tr(Σa + Σb − 2 (Σa Σb)^{1/2}) for any dimension. The trace of
/// the square root is taken from the symmetric form Σa^{1/2} Σb Σa^{1/2},
/// with negative eigenvalues from round-off clamped to zero. Result ≥ 0.
double frechet_distance(const GaussianSummary& a, const GaussianSummary& b);

/// Same quantity for 2-D Gaussians using the closed form
/// Tr((Σa Σb)^{1/2}) = sqrt(Tr(Σa Σb) + 2 sqrt(det(Σa Σb))).
double frechet_distance_2d(const GaussianSummary& a, const GaussianSummary& b);

}  // namespace tvbench
