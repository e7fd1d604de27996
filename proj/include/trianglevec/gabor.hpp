#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "trianglevec/features.hpp"
#include "trianglevec/image.hpp"

namespace tvec {

struct GaborParams {
  double sigma_x = 1.0;        // pixels
  double sigma_y = 1.0;        // pixels
  double wavelength = 1.0;     // angular spatial frequency, radians/pixel
  double orientation = 0.0;    // degrees, in (-180, 180]
};

/// Complex oriented Gaussian-windowed plane-wave kernel sampled on the
/// integer grid centered at the origin.
struct GaborKernel {
  GaborParams params;
  int size = 0;  // odd
  std::vector<std::complex<double>> values;

  std::complex<double> at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * size + c];
  }
};

struct Filterbank {
  std::vector<GaborKernel> kernels;
  std::vector<std::string> names;
};

struct ComplexImage {
  int height = 0;
  int width = 0;
  std::vector<std::complex<double>> values;

  std::complex<double> at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * width + c];
  }
};

void validate_gabor_params(const GaborParams& p);
std::string gabor_name(const GaborParams& p);

/// Samples the analytic kernel; size must be odd and >= 3. No discrete
/// renormalization is applied.
GaborKernel gabor_kernel(const GaborParams& p, int size);

/// Smallest odd support covering 8*sigma+1 for the given scale.
int default_kernel_size(double sigma_x, double sigma_y);

/// Six filters: scales {4,8,16} x orientations {+45,-45} degrees,
/// wavelength 1.
Filterbank make_default_filterbank();

enum class ConvMethod { fft, direct };

/// "Same"-size convolution with zero-padded borders.
ComplexImage convolve(const Image& img, const GaborKernel& k, ConvMethod method = ConvMethod::fft);

/// Euclidean norm of the response magnitudes over all pixels.
double response_norm(const Image& img, const GaborKernel& k);

struct EdgeLocations {
  double wall_x = 0;
  double wall_y = 0;
  double wall_strength_x = 0;
  double wall_strength_y = 0;
};

/// Localizes wall boundaries with two narrow edge-like kernels
/// (sigma 8 along the edge, 1 across, orientations 0/90 degrees).
/// Requires a 64x64 image.
EdgeLocations edge_locations(const Image& img);

/// 6 filterbank response norms (bank order) + 4 edge-location features.
FeatureVector vectorize_gabor(const Image& img, const Filterbank& bank);

/// Precomputes kernel spectra for repeated vectorization at a fixed size.
class GaborVectorizer {
 public:
  explicit GaborVectorizer(Filterbank bank, int height = 64, int width = 64);
  FeatureVector vectorize(const Image& img) const;
  const Filterbank& bank() const { return bank_; }

 private:
  Filterbank bank_;
  int height_, width_;
  int pad_h_, pad_w_;
  std::vector<std::vector<std::complex<double>>> spectra_;
  std::vector<int> radii_;
};

/// Versioned structured-text serialization of filterbank parameters.
void save_filterbank(const Filterbank& bank, const std::filesystem::path& path);
Filterbank load_filterbank(const std::filesystem::path& path);

}  // namespace tvec
