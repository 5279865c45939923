#pragma once

#include <span>

#include <Eigen/Core>

namespace tvbench {

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2D operator*(double s, Point2D p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2D&, const Point2D&) = default;
};

double distance(Point2D a, Point2D b);
double squared_distance(Point2D a, Point2D b);

/// Axis-aligned box in pixels. Pixel boxes use the half-open convention:
/// a box covering pixel columns [x_min, x_max) and rows [y_min, y_max).
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool valid() const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection over union. Zero-area boxes always score 0.
double box_iou(const BoundingBox& a, const BoundingBox& b);

/// Tight box around continuous points (x_max/y_max are the max coordinates,
/// not exclusive pixel bounds). Empty input yields an invalid-argument error.
BoundingBox enclosing_box(std::span<const Point2D> points);

/// x -> scale * rotation * x + translation, rotation proper (det = +1).
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
  Point2D translation;

  static SimilarityTransform identity() { return {}; }
  static SimilarityTransform from_parameters(double scale, double angle, Point2D translation);

  Point2D apply(Point2D p) const;
  double angle() const;

  /// (this ∘ inner)(x) = this(inner(x)).
  SimilarityTransform compose(const SimilarityTransform& inner) const;
};

/// Least-squares similarity taking `source` onto `target` (Umeyama / orthogonal
/// Procrustes with scale, reflections excluded). Throws kInvalidArgument for
/// mismatched lengths or fewer than two points and kInsufficientData when
/// every source point coincides.
SimilarityTransform estimate_similarity(std::span<const Point2D> source,
                                        std::span<const Point2D> target);

/// Σ ‖T(source_i) − target_i‖².
double alignment_residual(const SimilarityTransform& transform,
                          std::span<const Point2D> source,
                          std::span<const Point2D> target);

}  // namespace tvbench
