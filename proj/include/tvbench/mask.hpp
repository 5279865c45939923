#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tvbench/geometry.hpp"

namespace tvbench {

/// Binary mask stored as COCO-style uncompressed RLE: column-major scan,
/// counts alternate background/foreground starting with background (the
/// first count may be zero). Only the canonical encoding is representable,
/// so two masks compare equal iff their pixels do.
class BinaryMask {
 public:
  BinaryMask() = default;

  /// Validates that the counts cover exactly width·height pixels and that no
  /// run after the first is empty.
  BinaryMask(int width, int height, std::vector<std::uint32_t> counts);

  /// `pixels` is row-major, nonzero = foreground.
  static BinaryMask from_dense(int width, int height, std::span<const std::uint8_t> pixels);
  static BinaryMask filled(int width, int height, bool foreground);
  /// Pixels whose centres fall inside the half-open box.
  static BinaryMask from_box(int width, int height, const BoundingBox& box);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }

  /// Row-major 0/1 bytes.
  std::vector<std::uint8_t> to_dense() const;
  std::uint64_t area() const;
  bool empty() const { return area() == 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint32_t> counts_;
};

using MaskSequence = std::vector<BinaryMask>;

/// |A∩B| / |A∪B|; two empty masks score 1. Dimension mismatch throws
/// kShapeMismatch.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Minimal half-open box around the foreground. Empty masks throw kEmptyMask.
BoundingBox bbox_from_mask(const BinaryMask& mask);

}  // namespace tvbench
