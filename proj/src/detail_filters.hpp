#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace tvec::detail {

// Shared separable-filter kernels. The fit objective calls these tens of
// thousands of times per image, so they work on raw buffers with
// caller-owned scratch, no allocation, and restrict-qualified inner loops.

inline int gaussian_radius(double sigma) { return static_cast<int>(std::ceil(4.0 * sigma)); }

/// Unit-sum Gaussian taps for 2*radius+1 samples.
inline void gaussian_taps(double sigma, int radius, std::vector<double>& w) {
  w.resize(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  for (int t = -radius; t <= radius; ++t) {
    double v = std::exp(-static_cast<double>(t) * t * inv2s2);
    w[static_cast<std::size_t>(t + radius)] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
}

struct BlurScratch {
  std::vector<double> taps;
  std::vector<double> padded;  // (h + 2*radius) x w, replicate rows
  std::vector<double> tmp;     // h x (w + 2*radius), horizontally padded
};

/// Separable Gaussian blur, replicate borders. in and out are h*w row-major
/// and must not alias. Mirrored taps are paired (w[t] == w[2R-t]) to halve
/// the multiply count. WFixed = 0 keeps the width a runtime value; the
/// 64-wide instantiation lets the compiler fully unroll the row loops.
template <int WFixed>
void gaussian_blur_impl(const double* in, int h, int w_runtime, double sigma, double* out,
                        BlurScratch& s) {
  const int w = WFixed ? WFixed : w_runtime;
  const int radius = gaussian_radius(sigma);
  gaussian_taps(sigma, radius, s.taps);
  const double* __restrict wt = s.taps.data();

  // Horizontal pass into tmp.
  s.tmp.resize(static_cast<std::size_t>(h) * w);
  s.padded.resize(static_cast<std::size_t>(w) + 2 * radius);
  double* __restrict pad = s.padded.data();
  for (int y = 0; y < h; ++y) {
    const double* __restrict row = in + static_cast<std::size_t>(y) * w;
    for (int i = 0; i < radius; ++i) pad[i] = row[0];
    for (int i = 0; i < w; ++i) pad[radius + i] = row[i];
    for (int i = 0; i < radius; ++i) pad[radius + w + i] = row[w - 1];
    double* __restrict dst = s.tmp.data() + static_cast<std::size_t>(y) * w;
    {
      const double c = wt[radius];
      const double* __restrict src = pad + radius;
      for (int x = 0; x < w; ++x) dst[x] = c * src[x];
    }
    for (int t = 0; t < radius; ++t) {
      const double c = wt[t];
      const double* __restrict lo = pad + t;
      const double* __restrict hi = pad + 2 * radius - t;
      for (int x = 0; x < w; ++x) dst[x] += c * (lo[x] + hi[x]);
    }
  }

  // Vertical pass; rows are contiguous so the inner loop vectorizes.
  for (int y = 0; y < h; ++y) {
    double* __restrict dst = out + static_cast<std::size_t>(y) * w;
    {
      const double c = wt[radius];
      const double* __restrict src = s.tmp.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) dst[x] = c * src[x];
    }
    for (int t = 0; t < radius; ++t) {
      const int y_lo = std::max(y + t - radius, 0);
      const int y_hi = std::min(y + radius - t, h - 1);
      const double c = wt[t];
      const double* __restrict lo = s.tmp.data() + static_cast<std::size_t>(y_lo) * w;
      const double* __restrict hi = s.tmp.data() + static_cast<std::size_t>(y_hi) * w;
      for (int x = 0; x < w; ++x) dst[x] += c * (lo[x] + hi[x]);
    }
  }
}

inline void gaussian_blur_into(const double* in, int h, int w, double sigma, double* out,
                               BlurScratch& s) {
  if (w == 64)
    gaussian_blur_impl<64>(in, h, w, sigma, out, s);
  else
    gaussian_blur_impl<0>(in, h, w, sigma, out, s);
}

/// sqrt(gx^2 + gy^2); central differences interior, one-sided at borders.
template <int WFixed>
void gradient_magnitude_impl(const double* in, int h, int w_runtime, double* out) {
  const int w = WFixed ? WFixed : w_runtime;
  for (int y = 0; y < h; ++y) {
    const double* __restrict rm = in + static_cast<std::size_t>(std::max(y - 1, 0)) * w;
    const double* __restrict rp = in + static_cast<std::size_t>(std::min(y + 1, h - 1)) * w;
    const double* __restrict r0 = in + static_cast<std::size_t>(y) * w;
    const double sy = (y == 0 || y == h - 1) ? 1.0 : 0.5;
    double* __restrict dst = out + static_cast<std::size_t>(y) * w;
    for (int x = 1; x < w - 1; ++x) {
      const double gx = 0.5 * (r0[x + 1] - r0[x - 1]);
      const double gy = sy * (rp[x] - rm[x]);
      dst[x] = std::sqrt(gx * gx + gy * gy);
    }
    {
      const double gx = r0[1] - r0[0];
      const double gy = sy * (rp[0] - rm[0]);
      dst[0] = std::sqrt(gx * gx + gy * gy);
    }
    {
      const double gx = r0[w - 1] - r0[w - 2];
      const double gy = sy * (rp[w - 1] - rm[w - 1]);
      dst[w - 1] = std::sqrt(gx * gx + gy * gy);
    }
  }
}

inline void gradient_magnitude_into(const double* in, int h, int w, double* out) {
  if (w == 64)
    gradient_magnitude_impl<64>(in, h, w, out);
  else
    gradient_magnitude_impl<0>(in, h, w, out);
}

}  // namespace tvec::detail
