#pragma once

#include <complex>
#include <vector>

namespace tvec::detail {

// Iterative radix-2 complex FFT, power-of-two lengths only. Convolutions in
// this library run at a handful of fixed padded sizes (<= 256 per axis), so
// a self-contained transform keeps the hot path dependency-free and
// bit-reproducible.

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::complex<double>* a, int n, bool inverse);

/// 2D transform of a row-major h x w grid (both powers of two).
void fft2_inplace(std::complex<double>* a, int h, int w, bool inverse);

}  // namespace tvec::detail
