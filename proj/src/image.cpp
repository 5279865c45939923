#include "tvbench/image.hpp"

#include <cmath>
#include <string>

#include "tvbench/error.hpp"

namespace tvbench {

void validate(const FrameSequence& seq) {
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const Frame& f = seq.frames[t];
    if (f.width != seq.width() || f.height != seq.height() || f.width <= 0 || f.height <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(t) + " has size " +
                                                   std::to_string(f.width) + "x" +
                                                   std::to_string(f.height));
    }
    if (f.rgb.size() != f.pixel_count() * 3) {
      throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(t) + ": short pixel buffer");
    }
  }
}

Plane channel_plane(const Frame& frame, int c, PixelMask mask) {
  Plane p(frame.width, frame.height);
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    const bool keep = mask.empty() || mask[i] != 0;
    p.data[i] = keep ? static_cast<double>(frame.rgb[i * 3 + c]) : 0.0;
  }
  return p;
}

Plane luma_plane(const Frame& frame, PixelMask mask) {
  Plane p(frame.width, frame.height);
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    if (!mask.empty() && mask[i] == 0) continue;
    p.data[i] = 0.299 * frame.rgb[i * 3] + 0.587 * frame.rgb[i * 3 + 1] + 0.114 * frame.rgb[i * 3 + 2];
  }
  return p;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const int r = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - r;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

namespace {

// Separable 'valid' Gaussian filtering of the five SSIM moments.
struct Moments {
  Plane a, b, aa, bb, ab;
};

Moments filtered_moments(const Plane& x, const Plane& y, const std::vector<double>& k) {
  const int win = static_cast<int>(k.size());
  const int ow = x.width - win + 1;
  const int oh = x.height - win + 1;
  Plane ha(ow, x.height), hb(ow, x.height), haa(ow, x.height), hbb(ow, x.height), hab(ow, x.height);
  for (int yy = 0; yy < x.height; ++yy) {
    const double* rx = &x.data[static_cast<std::size_t>(yy) * x.width];
    const double* ry = &y.data[static_cast<std::size_t>(yy) * y.width];
    for (int xx = 0; xx < ow; ++xx) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i) {
        const double va = rx[xx + i];
        const double vb = ry[xx + i];
        const double w = k[i];
        sa += w * va;
        sb += w * vb;
        saa += w * va * va;
        sbb += w * vb * vb;
        sab += w * va * vb;
      }
      ha.at(xx, yy) = sa;
      hb.at(xx, yy) = sb;
      haa.at(xx, yy) = saa;
      hbb.at(xx, yy) = sbb;
      hab.at(xx, yy) = sab;
    }
  }
  Moments m{Plane(ow, oh), Plane(ow, oh), Plane(ow, oh), Plane(ow, oh), Plane(ow, oh)};
  for (int yy = 0; yy < oh; ++yy) {
    for (int xx = 0; xx < ow; ++xx) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i) {
        const double w = k[i];
        sa += w * ha.at(xx, yy + i);
        sb += w * hb.at(xx, yy + i);
        saa += w * haa.at(xx, yy + i);
        sbb += w * hbb.at(xx, yy + i);
        sab += w * hab.at(xx, yy + i);
      }
      m.a.at(xx, yy) = sa;
      m.b.at(xx, yy) = sb;
      m.aa.at(xx, yy) = saa;
      m.bb.at(xx, yy) = sbb;
      m.ab.at(xx, yy) = sab;
    }
  }
  return m;
}

Plane ssim_from_moments(const Moments& m, const SsimParams& params) {
  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);
  Plane out(m.a.width, m.a.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double mu_a = m.a.data[i];
    const double mu_b = m.b.data[i];
    const double var_a = m.aa.data[i] - mu_a * mu_a;
    const double var_b = m.bb.data[i] - mu_b * mu_b;
    const double cov = m.ab.data[i] - mu_a * mu_b;
    out.data[i] = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                  ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
  }
  return out;
}

void check_window(const Plane& a, const Plane& b, int window) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorCode::kShapeMismatch, "ssim: image sizes differ");
  }
  if (window <= 0 || window % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "ssim: window must be odd and positive");
  }
  if (a.width < window || a.height < window) {
    throw Error(ErrorCode::kInvalidArgument, "ssim: " + std::to_string(a.width) + "x" +
                                                 std::to_string(a.height) +
                                                 " image is smaller than the " +
                                                 std::to_string(window) + "-pixel window");
  }
}

}  // namespace

Plane ssim_map(const Plane& a, const Plane& b, const SsimParams& params) {
  check_window(a, b, params.window);
  return ssim_from_moments(filtered_moments(a, b, gaussian_kernel(params.window, params.sigma)),
                           params);
}

Plane ssim_map_3d(std::span<const Plane> a, std::span<const Plane> b, const SsimParams& params) {
  const auto depth = static_cast<std::size_t>(params.temporal_window);
  if (a.size() != depth || b.size() != depth) {
    throw Error(ErrorCode::kInvalidArgument, "ssim_map_3d: block must hold " +
                                                 std::to_string(depth) + " frames");
  }
  for (std::size_t t = 0; t < depth; ++t) {
    check_window(a[t], b[t], params.window);
    check_window(a[0], a[t], params.window);
  }
  const auto spatial = gaussian_kernel(params.window, params.sigma);
  const auto temporal = gaussian_kernel(params.temporal_window, params.temporal_sigma);
  Moments acc;
  for (std::size_t t = 0; t < depth; ++t) {
    Moments m = filtered_moments(a[t], b[t], spatial);
    const double w = temporal[t];
    if (t == 0) {
      acc = Moments{Plane(m.a.width, m.a.height), Plane(m.a.width, m.a.height),
                    Plane(m.a.width, m.a.height), Plane(m.a.width, m.a.height),
                    Plane(m.a.width, m.a.height)};
    }
    for (std::size_t i = 0; i < m.a.data.size(); ++i) {
      acc.a.data[i] += w * m.a.data[i];
      acc.b.data[i] += w * m.b.data[i];
      acc.aa.data[i] += w * m.aa.data[i];
      acc.bb.data[i] += w * m.bb.data[i];
      acc.ab.data[i] += w * m.ab.data[i];
    }
  }
  return ssim_from_moments(acc, params);
}

bool masked_mean(const Plane& map, int offset, int image_width, PixelMask mask, double& mean) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (!mask.empty()) {
        const std::size_t idx = static_cast<std::size_t>(y + offset) * image_width + (x + offset);
        if (mask[idx] == 0) continue;
      }
      sum += map.at(x, y);
      ++n;
    }
  }
  if (n == 0) return false;
  mean = sum / static_cast<double>(n);
  return true;
}

Plane prewitt_magnitude(const Plane& image) {
  if (image.width < 3 || image.height < 3) {
    throw Error(ErrorCode::kInvalidArgument, "prewitt: image smaller than 3x3");
  }
  Plane out(image.width - 2, image.height - 2);
  for (int y = 1; y < image.height - 1; ++y) {
    for (int x = 1; x < image.width - 1; ++x) {
      const double gx = (image.at(x + 1, y - 1) + image.at(x + 1, y) + image.at(x + 1, y + 1) -
                         image.at(x - 1, y - 1) - image.at(x - 1, y) - image.at(x - 1, y + 1)) / 3.0;
      const double gy = (image.at(x - 1, y + 1) + image.at(x, y + 1) + image.at(x + 1, y + 1) -
                         image.at(x - 1, y - 1) - image.at(x, y - 1) - image.at(x + 1, y - 1)) / 3.0;
      out.at(x - 1, y - 1) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

}  // namespace tvbench
