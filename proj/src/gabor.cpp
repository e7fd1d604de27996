#include "trianglevec/gabor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "detail_fft.hpp"
#include "trianglevec/errors.hpp"

namespace tvec {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string trim_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

void validate_gabor_params(const GaborParams& p) {
  if (!(p.sigma_x > 0) || !(p.sigma_y > 0))
    throw InvalidArgumentError("gabor sigma_x and sigma_y must be > 0");
  if (!(p.wavelength > 0)) throw InvalidArgumentError("gabor wavelength must be > 0");
  if (!(p.orientation > -180.0) || !(p.orientation <= 180.0))
    throw InvalidArgumentError("gabor orientation must lie in (-180, 180]");
}

std::string gabor_name(const GaborParams& p) {
  return "G" + trim_num(p.orientation) + "_" + trim_num(p.sigma_x) + "_" + trim_num(p.sigma_y);
}

GaborKernel gabor_kernel(const GaborParams& p, int size) {
  validate_gabor_params(p);
  if (size < 3 || size % 2 == 0)
    throw InvalidArgumentError("gabor kernel size must be odd and >= 3, got " +
                               std::to_string(size));
  GaborKernel k;
  k.params = p;
  k.size = size;
  k.values.resize(static_cast<std::size_t>(size) * size);
  const int r = size / 2;
  const double theta = p.orientation * kDegToRad;
  const double st = std::sin(theta), ct = std::cos(theta);
  const double amp = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * p.sigma_x * p.sigma_y);
  const double ix = 1.0 / (p.sigma_x * p.sigma_x);
  const double iy = 1.0 / (p.sigma_y * p.sigma_y);
  for (int row = 0; row < size; ++row) {
    const double y = row - r;
    for (int col = 0; col < size; ++col) {
      const double x = col - r;
      const double env = amp * std::exp(-0.5 * (x * x * ix + y * y * iy));
      const double phase = p.wavelength * (x * st + y * ct);
      k.values[static_cast<std::size_t>(row) * size + col] =
          std::complex<double>(env * std::cos(phase), env * std::sin(phase));
    }
  }
  return k;
}

int default_kernel_size(double sigma_x, double sigma_y) {
  int s = static_cast<int>(std::ceil(8.0 * std::max(sigma_x, sigma_y))) + 1;
  if (s % 2 == 0) ++s;
  return std::max(s, 3);
}

Filterbank make_default_filterbank() {
  Filterbank bank;
  for (double sigma : {4.0, 8.0, 16.0}) {
    for (double orient : {45.0, -45.0}) {
      GaborParams p{sigma, sigma, 1.0, orient};
      bank.kernels.push_back(gabor_kernel(p, default_kernel_size(sigma, sigma)));
      bank.names.push_back(gabor_name(p));
    }
  }
  return bank;
}

namespace {

ComplexImage convolve_direct(const Image& img, const GaborKernel& k) {
  ComplexImage out;
  out.height = img.height;
  out.width = img.width;
  out.values.assign(static_cast<std::size_t>(img.height) * img.width, {0.0, 0.0});
  const int r = k.size / 2;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      std::complex<double> acc(0.0, 0.0);
      const int a_lo = std::max(-r, y - (img.height - 1));
      const int a_hi = std::min(r, y);
      const int b_lo = std::max(-r, x - (img.width - 1));
      const int b_hi = std::min(r, x);
      for (int a = a_lo; a <= a_hi; ++a) {
        const std::complex<double>* krow =
            k.values.data() + static_cast<std::size_t>(a + r) * k.size;
        const double* irow = img.values.data() + static_cast<std::size_t>(y - a) * img.width;
        for (int b = b_lo; b <= b_hi; ++b) acc += krow[b + r] * irow[x - b];
      }
      out.values[static_cast<std::size_t>(y) * img.width + x] = acc;
    }
  }
  return out;
}

ComplexImage convolve_fft(const Image& img, const GaborKernel& k) {
  const int r = k.size / 2;
  const int ph = detail::next_pow2(img.height + k.size - 1);
  const int pw = detail::next_pow2(img.width + k.size - 1);
  std::vector<std::complex<double>> a(static_cast<std::size_t>(ph) * pw, {0.0, 0.0});
  std::vector<std::complex<double>> b(static_cast<std::size_t>(ph) * pw, {0.0, 0.0});
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      a[static_cast<std::size_t>(y) * pw + x] = img.at(y, x);
  for (int y = 0; y < k.size; ++y)
    for (int x = 0; x < k.size; ++x)
      b[static_cast<std::size_t>(y) * pw + x] = k.at(y, x);
  detail::fft2_inplace(a.data(), ph, pw, false);
  detail::fft2_inplace(b.data(), ph, pw, false);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  detail::fft2_inplace(a.data(), ph, pw, true);
  ComplexImage out;
  out.height = img.height;
  out.width = img.width;
  out.values.resize(static_cast<std::size_t>(img.height) * img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.values[static_cast<std::size_t>(y) * img.width + x] =
          a[static_cast<std::size_t>(y + r) * pw + (x + r)];
  return out;
}

}  // namespace

ComplexImage convolve(const Image& img, const GaborKernel& k, ConvMethod method) {
  if (img.height <= 0 || img.width <= 0) throw InvalidArgumentError("convolve: empty image");
  return method == ConvMethod::direct ? convolve_direct(img, k) : convolve_fft(img, k);
}

double response_norm(const Image& img, const GaborKernel& k) {
  ComplexImage resp = convolve(img, k);
  double sum = 0.0;
  for (const auto& v : resp.values) sum += std::norm(v);
  return std::sqrt(sum);
}

namespace {

// Narrow edge probes: sigma 8 along the edge, 1 across, wavelength 1.
GaborParams vertical_edge_params() { return {1.0, 8.0, 1.0, 90.0}; }
GaborParams horizontal_edge_params() { return {8.0, 1.0, 1.0, 0.0}; }

// Zero-padding turns the image boundary itself into a step, so the argmax
// is restricted to columns/rows a half kernel-width away from the border.
constexpr int kEdgeMargin = 4;

struct ProfilePeak {
  double location = 0;
  double strength = 0;
};

ProfilePeak peak(const std::vector<double>& profile) {
  ProfilePeak out;
  const int n = static_cast<int>(profile.size());
  int best = -1;
  double best_v = 0.0;
  for (int i = kEdgeMargin; i < n - kEdgeMargin; ++i) {
    if (best < 0 || profile[i] > best_v) {
      best = i;
      best_v = profile[i];
    }
  }
  if (best < 0 || best_v < 1e-12) return out;  // flat response: 0 by convention
  out.location = best;
  out.strength = best_v;
  return out;
}

}  // namespace

EdgeLocations edge_locations(const Image& img) {
  if (img.height != 64 || img.width != 64)
    throw InvalidArgumentError("edge_locations expects a 64x64 image");
  // Remove the mean so a constant image yields exactly zero response.
  Image centered = img;
  double mean = 0.0;
  for (double v : centered.values) mean += v;
  mean /= static_cast<double>(centered.values.size());
  for (double& v : centered.values) v -= mean;

  GaborKernel kv = gabor_kernel(vertical_edge_params(), default_kernel_size(1, 8));
  GaborKernel kh = gabor_kernel(horizontal_edge_params(), default_kernel_size(8, 1));
  ComplexImage rv = convolve(centered, kv);
  ComplexImage rh = convolve(centered, kh);

  std::vector<double> col_profile(static_cast<std::size_t>(img.width), 0.0);
  std::vector<double> row_profile(static_cast<std::size_t>(img.height), 0.0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      col_profile[x] += std::abs(rv.at(y, x));
      row_profile[y] += std::abs(rh.at(y, x));
    }
  ProfilePeak px = peak(col_profile);
  ProfilePeak py = peak(row_profile);
  return {px.location, py.location, px.strength, py.strength};
}

FeatureVector vectorize_gabor(const Image& img, const Filterbank& bank) {
  return GaborVectorizer(bank, img.height, img.width).vectorize(img);
}

GaborVectorizer::GaborVectorizer(Filterbank bank, int height, int width)
    : bank_(std::move(bank)), height_(height), width_(width) {
  if (bank_.kernels.size() != bank_.names.size())
    throw InvalidArgumentError("filterbank names and kernels are misaligned");
  int max_size = 3;
  for (const auto& k : bank_.kernels) max_size = std::max(max_size, k.size);
  GaborKernel kv = gabor_kernel(vertical_edge_params(), default_kernel_size(1, 8));
  GaborKernel kh = gabor_kernel(horizontal_edge_params(), default_kernel_size(8, 1));
  max_size = std::max({max_size, kv.size, kh.size});
  pad_h_ = detail::next_pow2(height_ + max_size - 1);
  pad_w_ = detail::next_pow2(width_ + max_size - 1);

  auto add_spectrum = [this](const GaborKernel& k) {
    std::vector<std::complex<double>> s(static_cast<std::size_t>(pad_h_) * pad_w_, {0.0, 0.0});
    for (int y = 0; y < k.size; ++y)
      for (int x = 0; x < k.size; ++x) s[static_cast<std::size_t>(y) * pad_w_ + x] = k.at(y, x);
    detail::fft2_inplace(s.data(), pad_h_, pad_w_, false);
    spectra_.push_back(std::move(s));
    radii_.push_back(k.size / 2);
  };
  for (const auto& k : bank_.kernels) add_spectrum(k);
  add_spectrum(kv);  // second-to-last: vertical-edge probe
  add_spectrum(kh);  // last: horizontal-edge probe
}

FeatureVector GaborVectorizer::vectorize(const Image& img) const {
  if (img.height != height_ || img.width != width_)
    throw InvalidArgumentError("image size does not match this vectorizer");
  const std::size_t pad_n = static_cast<std::size_t>(pad_h_) * pad_w_;
  std::vector<std::complex<double>> base(pad_n, {0.0, 0.0});
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) base[static_cast<std::size_t>(y) * pad_w_ + x] = img.at(y, x);
  detail::fft2_inplace(base.data(), pad_h_, pad_w_, false);

  // Mean-removed variant for the edge probes.
  double mean = 0.0;
  for (double v : img.values) mean += v;
  mean /= static_cast<double>(img.values.size());
  std::vector<std::complex<double>> centered(pad_n, {0.0, 0.0});
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      centered[static_cast<std::size_t>(y) * pad_w_ + x] = img.at(y, x) - mean;
  detail::fft2_inplace(centered.data(), pad_h_, pad_w_, false);

  FeatureVector fv;
  std::vector<std::complex<double>> work(pad_n);
  const std::size_t n_bank = bank_.kernels.size();
  std::vector<double> col_profile, row_profile;
  for (std::size_t i = 0; i < spectra_.size(); ++i) {
    const bool edge_probe = i >= n_bank;
    const auto& src = edge_probe ? centered : base;
    for (std::size_t j = 0; j < pad_n; ++j) work[j] = src[j] * spectra_[i][j];
    detail::fft2_inplace(work.data(), pad_h_, pad_w_, true);
    const int r = radii_[i];
    if (!edge_probe) {
      double sum = 0.0;
      for (int y = 0; y < height_; ++y) {
        const std::complex<double>* row = work.data() + static_cast<std::size_t>(y + r) * pad_w_ + r;
        for (int x = 0; x < width_; ++x) sum += std::norm(row[x]);
      }
      fv.names.push_back(bank_.names[i]);
      fv.values.push_back(std::sqrt(sum));
    } else {
      std::vector<double>& profile = (i == n_bank) ? col_profile : row_profile;
      profile.assign(static_cast<std::size_t>(i == n_bank ? width_ : height_), 0.0);
      for (int y = 0; y < height_; ++y) {
        const std::complex<double>* row = work.data() + static_cast<std::size_t>(y + r) * pad_w_ + r;
        for (int x = 0; x < width_; ++x) {
          double mag = std::abs(row[x]);
          if (i == n_bank)
            profile[x] += mag;
          else
            profile[y] += mag;
        }
      }
    }
  }
  ProfilePeak px = peak(col_profile);
  ProfilePeak py = peak(row_profile);
  fv.names.insert(fv.names.end(), {"wall_x", "wall_y", "wall_strength_x", "wall_strength_y"});
  fv.values.insert(fv.values.end(), {px.location, py.location, px.strength, py.strength});
  return fv;
}

void save_filterbank(const Filterbank& bank, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "trianglevec-filterbank v1\n";
  for (std::size_t i = 0; i < bank.kernels.size(); ++i) {
    const auto& p = bank.kernels[i].params;
    out << bank.names[i] << ' ' << format_double(p.sigma_x) << ' ' << format_double(p.sigma_y)
        << ' ' << format_double(p.wavelength) << ' ' << format_double(p.orientation) << ' '
        << bank.kernels[i].size << '\n';
  }
}

Filterbank load_filterbank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != "trianglevec-filterbank v1")
    throw ParseError("unrecognized filterbank header in " + path.string());
  Filterbank bank;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string name;
    GaborParams p;
    int size;
    if (!(ss >> name >> p.sigma_x >> p.sigma_y >> p.wavelength >> p.orientation >> size))
      throw ParseError("bad filterbank line: " + line);
    bank.kernels.push_back(gabor_kernel(p, size));
    bank.names.push_back(name);
  }
  return bank;
}

}  // namespace tvec
