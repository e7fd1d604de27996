#include "detail_fft.hpp"

#include <cmath>
#include <numbers>

namespace tvec::detail {

void fft_inplace(std::complex<double>* a, int n, bool inverse) {
  // Bit-reversal permutation.
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * std::numbers::pi / len * (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / n;
    for (int i = 0; i < n; ++i) a[i] *= inv;
  }
}

void fft2_inplace(std::complex<double>* a, int h, int w, bool inverse) {
  for (int y = 0; y < h; ++y) fft_inplace(a + static_cast<std::size_t>(y) * w, w, inverse);
  std::vector<std::complex<double>> col(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = a[static_cast<std::size_t>(y) * w + x];
    fft_inplace(col.data(), h, inverse);
    for (int y = 0; y < h; ++y) a[static_cast<std::size_t>(y) * w + x] = col[y];
  }
}

}  // namespace tvec::detail
