#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tvec {

/// Row-major real-valued measurement grid. Axes, when present, carry the
/// swept voltages per column (x) and per row (y).
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> values;
  std::vector<double> x_axis;
  std::vector<double> y_axis;
  std::string id;

  static Image zeros(int h, int w);

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }

  bool same_shape(const Image& o) const { return height == o.height && width == o.width; }

  friend bool operator==(const Image&, const Image&) = default;
};

enum class Label { good, bad };

const char* to_string(Label l);
Label label_from_string(std::string_view s);

struct LabeledImage {
  Image image;
  Label label = Label::bad;
};

enum class ImageFormat { csv_grid, pgm16 };

/// Throws InvalidArgumentError if dimensions/value count disagree, a value is
/// non-finite, or an axis is present but not strictly monotone.
void validate_image(const Image& img);

Image load_image(const std::filesystem::path& path, ImageFormat format);
void save_image_csv(const Image& img, const std::filesystem::path& path);

/// Catmull-Rom bicubic resampling with replicate borders.
Image resize_bicubic(const Image& img, int out_h, int out_w);

/// Affine map of the value range onto [0,1]; constant images map to zeros.
Image normalize_minmax(const Image& img);

/// Separable Gaussian, kernel truncated at 4*sigma and renormalized,
/// replicate-border padding.
Image gaussian_blur(const Image& img, double sigma);

/// Central differences in the interior, one-sided at borders.
Image gradient_magnitude(const Image& img);

Image transpose(const Image& img);

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
  Label label = Label::bad;
};

/// One record per line: id<TAB>path<TAB>label. Relative paths resolve
/// against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

}  // namespace tvec
