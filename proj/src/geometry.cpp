#include "tvbench/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "tvbench/error.hpp"

namespace tvbench {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kEmptyMask: return "empty-mask";
    case ErrorCode::kNoValidKeypoints: return "no-valid-keypoints";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

double squared_distance(Point2D a, Point2D b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double distance(Point2D a, Point2D b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool BoundingBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BoundingBox enclosing_box(std::span<const Point2D> points) {
  if (points.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "enclosing_box: no points");
  }
  BoundingBox box{points[0].x, points[0].y, points[0].x, points[0].y};
  for (const Point2D& p : points.subspan(1)) {
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

SimilarityTransform SimilarityTransform::from_parameters(double scale, double angle,
                                                         Point2D translation) {
  SimilarityTransform t;
  t.scale = scale;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  t.rotation << c, -s, s, c;
  t.translation = translation;
  return t;
}

Point2D SimilarityTransform::apply(Point2D p) const {
  const Eigen::Vector2d r = scale * (rotation * Eigen::Vector2d(p.x, p.y));
  return {r.x() + translation.x, r.y() + translation.y};
}

double SimilarityTransform::angle() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& inner) const {
  SimilarityTransform out;
  out.scale = scale * inner.scale;
  out.rotation = rotation * inner.rotation;
  out.translation = apply(inner.translation);
  return out;
}

SimilarityTransform estimate_similarity(std::span<const Point2D> source,
                                        std::span<const Point2D> target) {
  if (source.size() != target.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "estimate_similarity: " + std::to_string(source.size()) + " source vs " +
                    std::to_string(target.size()) + " target points");
  }
  if (source.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "estimate_similarity: need at least 2 points");
  }
  const double n = static_cast<double>(source.size());

  Eigen::Vector2d mean_src = Eigen::Vector2d::Zero();
  Eigen::Vector2d mean_dst = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    mean_src += Eigen::Vector2d(source[i].x, source[i].y);
    mean_dst += Eigen::Vector2d(target[i].x, target[i].y);
  }
  mean_src /= n;
  mean_dst /= n;

  Eigen::Matrix2d cross = Eigen::Matrix2d::Zero();
  double src_var = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Eigen::Vector2d ps = Eigen::Vector2d(source[i].x, source[i].y) - mean_src;
    const Eigen::Vector2d pd = Eigen::Vector2d(target[i].x, target[i].y) - mean_dst;
    cross += pd * ps.transpose();
    src_var += ps.squaredNorm();
  }
  cross /= n;
  src_var /= n;
  if (!(src_var > 0.0)) {
    throw Error(ErrorCode::kInsufficientData, "estimate_similarity: source points coincide");
  }

  Eigen::JacobiSVD<Eigen::Matrix2d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector2d signs(1.0, 1.0);
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) signs(1) = -1.0;

  SimilarityTransform t;
  t.rotation = svd.matrixU() * signs.asDiagonal() * svd.matrixV().transpose();
  t.scale = svd.singularValues().dot(signs) / src_var;
  if (!(t.scale > 0.0)) {
    throw Error(ErrorCode::kInsufficientData, "estimate_similarity: target points coincide");
  }
  const Eigen::Vector2d shift = mean_dst - t.scale * (t.rotation * mean_src);
  t.translation = {shift.x(), shift.y()};
  return t;
}

double alignment_residual(const SimilarityTransform& transform,
                          std::span<const Point2D> source,
                          std::span<const Point2D> target) {
  if (source.size() != target.size()) {
    throw Error(ErrorCode::kInvalidArgument, "alignment_residual: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    sum += squared_distance(transform.apply(source[i]), target[i]);
  }
  return sum;
}

}  // namespace tvbench
