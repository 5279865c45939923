#include "tvbench/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "tvbench/error.hpp"

namespace tvbench {
namespace {

struct Run {
  std::uint64_t begin;
  std::uint64_t end;
};

// Foreground runs as [begin, end) offsets in column-major order.
std::vector<Run> foreground_runs(const BinaryMask& mask) {
  std::vector<Run> runs;
  std::uint64_t pos = 0;
  const auto& counts = mask.counts();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i % 2 == 1 && counts[i] > 0) runs.push_back({pos, pos + counts[i]});
    pos += counts[i];
  }
  return runs;
}

std::vector<std::uint32_t> encode_column_major(int width, int height, auto&& is_foreground) {
  std::vector<std::uint32_t> counts;
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      const bool v = is_foreground(x, y);
      if (v != current) {
        counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

}  // namespace

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint32_t> counts)
    : width_(width), height_(height), counts_(std::move(counts)) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "mask dimensions must be positive");
  }
  if (counts_.empty()) throw Error(ErrorCode::kInvalidArgument, "mask counts are empty");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (i > 0 && counts_[i] == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mask counts: zero-length run at index " + std::to_string(i));
    }
    total += counts_[i];
  }
  const std::uint64_t expected = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  if (total != expected) {
    throw Error(ErrorCode::kInvalidArgument, "mask counts sum to " + std::to_string(total) +
                                                 ", expected " + std::to_string(expected));
  }
}

BinaryMask BinaryMask::from_dense(int width, int height, std::span<const std::uint8_t> pixels) {
  if (width <= 0 || height <= 0 ||
      pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kInvalidArgument, "from_dense: pixel buffer does not match dimensions");
  }
  return BinaryMask(width, height, encode_column_major(width, height, [&](int x, int y) {
                      return pixels[static_cast<std::size_t>(y) * width + x] != 0;
                    }));
}

BinaryMask BinaryMask::filled(int width, int height, bool foreground) {
  const auto total = static_cast<std::uint32_t>(width * height);
  if (foreground) return BinaryMask(width, height, {0u, total});
  return BinaryMask(width, height, {total});
}

BinaryMask BinaryMask::from_box(int width, int height, const BoundingBox& box) {
  return BinaryMask(width, height, encode_column_major(width, height, [&](int x, int y) {
                      const double cx = x + 0.5;
                      const double cy = y + 0.5;
                      return cx >= box.x_min && cx < box.x_max && cy >= box.y_min && cy < box.y_max;
                    }));
}

std::vector<std::uint8_t> BinaryMask::to_dense() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width_) * height_, 0);
  for (const Run& r : foreground_runs(*this)) {
    for (std::uint64_t i = r.begin; i < r.end; ++i) {
      const std::uint64_t x = i / static_cast<std::uint64_t>(height_);
      const std::uint64_t y = i % static_cast<std::uint64_t>(height_);
      out[y * width_ + x] = 1;
    }
  }
  return out;
}

std::uint64_t BinaryMask::area() const {
  std::uint64_t a = 0;
  for (std::size_t i = 1; i < counts_.size(); i += 2) a += counts_[i];
  return a;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kShapeMismatch,
                "mask_iou: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
  const auto ra = foreground_runs(a);
  const auto rb = foreground_runs(b);
  std::uint64_t inter = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ra.size() && j < rb.size()) {
    const std::uint64_t lo = std::max(ra[i].begin, rb[j].begin);
    const std::uint64_t hi = std::min(ra[i].end, rb[j].end);
    if (hi > lo) inter += hi - lo;
    if (ra[i].end < rb[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::uint64_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BoundingBox bbox_from_mask(const BinaryMask& mask) {
  const auto runs = foreground_runs(mask);
  if (runs.empty()) throw Error(ErrorCode::kEmptyMask, "bbox_from_mask: mask is empty");
  const auto h = static_cast<std::uint64_t>(mask.height());
  std::uint64_t x_min = UINT64_MAX, y_min = UINT64_MAX, x_max = 0, y_max = 0;
  for (const Run& r : runs) {
    const std::uint64_t x0 = r.begin / h;
    const std::uint64_t x1 = (r.end - 1) / h;
    std::uint64_t y0 = r.begin % h;
    std::uint64_t y1 = (r.end - 1) % h;
    if (x0 != x1) {
      y0 = 0;
      y1 = h - 1;
    }
    x_min = std::min(x_min, x0);
    x_max = std::max(x_max, x1);
    y_min = std::min(y_min, y0);
    y_max = std::max(y_max, y1);
  }
  return {static_cast<double>(x_min), static_cast<double>(y_min),
          static_cast<double>(x_max + 1), static_cast<double>(y_max + 1)};
}

}  // namespace tvbench
