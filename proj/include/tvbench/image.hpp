#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tvbench {

/// 8-bit RGB frame, row-major, channels interleaved.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t at(int x, int y, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

struct FrameSequence {
  std::vector<Frame> frames;

  std::size_t size() const { return frames.size(); }
  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
};

/// Throws kInvalidArgument if frames differ in size or buffers are short.
void validate(const FrameSequence& seq);

/// Single-channel floating-point image.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Row-major 0/1 foreground flags, one per pixel; empty span = whole frame.
using PixelMask = std::span<const std::uint8_t>;

/// Channel `c` of `frame`; background pixels are zeroed when a mask is given.
Plane channel_plane(const Frame& frame, int c, PixelMask mask = {});

/// ITU-R BT.601 luma, background zeroed when a mask is given.
Plane luma_plane(const Frame& frame, PixelMask mask = {});

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
  /// Temporal extent and Gaussian width of the volumetric window.
  int temporal_window = 3;
  double temporal_sigma = 1.5;
};

/// Normalised 1-D Gaussian taps of odd length `size`.
std::vector<double> gaussian_kernel(int size, double sigma);

/// Local SSIM at every position where the window fits entirely inside the
/// image. Entry (x, y) belongs to the window centred on pixel (x + r, y + r),
/// r = window / 2. Throws kInvalidArgument if the image is smaller than the
/// window.
Plane ssim_map(const Plane& a, const Plane& b, const SsimParams& params = {});

/// Volumetric SSIM for one block of `temporal_window` frames with a separable
/// spatial × temporal Gaussian window; the map is indexed as ssim_map's and
/// belongs to the block's middle frame.
Plane ssim_map_3d(std::span<const Plane> a, std::span<const Plane> b,
                  const SsimParams& params = {});

/// Mean of `map` over entries whose centre pixel is foreground. `offset` is
/// the map's inset into the image. Returns false if no entry qualifies.
bool masked_mean(const Plane& map, int offset, int image_width, PixelMask mask, double& mean);

/// Prewitt gradient magnitude on interior pixels (inset 1).
Plane prewitt_magnitude(const Plane& image);

}  // namespace tvbench
