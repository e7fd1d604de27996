#include "trianglevec/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "detail_filters.hpp"
#include "trianglevec/errors.hpp"
#include "trianglevec/features.hpp"

namespace tvec {

Image Image::zeros(int h, int w) {
  Image img;
  img.height = h;
  img.width = w;
  img.values.assign(static_cast<std::size_t>(h) * w, 0.0);
  return img;
}

const char* to_string(Label l) { return l == Label::good ? "good" : "bad"; }

Label label_from_string(std::string_view s) {
  if (s == "good") return Label::good;
  if (s == "bad") return Label::bad;
  throw ParseError("unknown label '" + std::string(s) + "' (expected good or bad)");
}

namespace {

void check_axis(const std::vector<double>& axis, std::size_t expected, const char* name) {
  if (axis.empty()) return;
  if (axis.size() != expected)
    throw InvalidArgumentError(std::string(name) + " axis length " + std::to_string(axis.size()) +
                               " does not match grid dimension " + std::to_string(expected));
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) inc = false;
    if (!(axis[i] < axis[i - 1])) dec = false;
  }
  if (!inc && !dec)
    throw InvalidArgumentError(std::string(name) + " axis is not strictly monotone");
}

}  // namespace

void validate_image(const Image& img) {
  if (img.height <= 0 || img.width <= 0)
    throw InvalidArgumentError("image dimensions must be positive");
  if (img.values.size() != static_cast<std::size_t>(img.height) * img.width)
    throw InvalidArgumentError("image value count " + std::to_string(img.values.size()) +
                               " does not equal height*width");
  for (std::size_t i = 0; i < img.values.size(); ++i)
    if (!std::isfinite(img.values[i]))
      throw InvalidArgumentError("non-finite value at row " +
                                 std::to_string(i / static_cast<std::size_t>(img.width)) +
                                 ", col " + std::to_string(i % static_cast<std::size_t>(img.width)));
  check_axis(img.x_axis, static_cast<std::size_t>(img.width), "x");
  check_axis(img.y_axis, static_cast<std::size_t>(img.height), "y");
}

namespace {

std::vector<double> parse_axis_line(const std::string& line, const std::string& prefix) {
  std::vector<double> out;
  std::string payload = line.substr(prefix.size());
  std::stringstream ss(payload);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ParseError("bad axis value '" + cell + "' in line '" + prefix + "...'");
    }
  }
  return out;
}

Image load_csv_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  Image img;
  std::string line;
  std::size_t row = 0;
  bool first_data = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# x:", 0) == 0) {
      img.x_axis = parse_axis_line(line, "# x:");
      continue;
    }
    if (line.rfind("# y:", 0) == 0) {
      img.y_axis = parse_axis_line(line, "# y:");
      continue;
    }
    if (line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      try {
        std::size_t pos = 0;
        v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("unparseable cell '" + cell + "' at row " + std::to_string(row) +
                         ", col " + std::to_string(col) + " in " + path.string());
      }
      if (!std::isfinite(v))
        throw ParseError("non-finite entry at row " + std::to_string(row) + ", col " +
                         std::to_string(col) + " in " + path.string());
      img.values.push_back(v);
      ++col;
    }
    if (first_data) {
      img.width = static_cast<int>(col);
      first_data = false;
    } else if (col != static_cast<std::size_t>(img.width)) {
      throw ParseError("ragged row " + std::to_string(row) + ": got " + std::to_string(col) +
                       " cells, expected " + std::to_string(img.width) + " in " + path.string());
    }
    ++row;
  }
  if (row == 0) throw ParseError("no data rows in " + path.string());
  img.height = static_cast<int>(row);
  img.id = path.stem().string();
  validate_image(img);
  return img;
}

Image load_pgm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  auto next_token = [&in, &path]() {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw ParseError("truncated PGM header in " + path.string());
    return tok;
  };
  if (next_token() != "P5") throw ParseError("not a binary PGM (P5): " + path.string());
  int w, h, maxval;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw ParseError("bad PGM header in " + path.string());
  }
  if (maxval != 65535)
    throw ParseError("pgm16 requires maxval 65535, got " + std::to_string(maxval));
  Image img = Image::zeros(h, w);
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 2);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw ParseError("truncated PGM payload in " + path.string());
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    unsigned v = (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1];  // big-endian
    img.values[i] = static_cast<double>(v) / 65535.0;
  }
  img.id = path.stem().string();
  return img;
}

}  // namespace

Image load_image(const std::filesystem::path& path, ImageFormat format) {
  if (!std::filesystem::exists(path)) throw ParseError("file not found: " + path.string());
  switch (format) {
    case ImageFormat::csv_grid:
      return load_csv_grid(path);
    case ImageFormat::pgm16:
      return load_pgm16(path);
  }
  throw InvalidArgumentError("unknown image format");
}

void save_image_csv(const Image& img, const std::filesystem::path& path) {
  validate_image(img);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  auto axis_line = [&out](const char* tag, const std::vector<double>& axis) {
    out << tag;
    for (std::size_t i = 0; i < axis.size(); ++i)
      out << (i ? "," : "") << format_double(axis[i]);
    out << "\n";
  };
  if (!img.x_axis.empty()) axis_line("# x:", img.x_axis);
  if (!img.y_axis.empty()) axis_line("# y:", img.y_axis);
  char buf[40];
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      std::snprintf(buf, sizeof buf, "%.9g", img.at(y, x));
      out << (x ? "," : "") << buf;
    }
    out << "\n";
  }
}

namespace {

// Catmull-Rom weights (a = -0.5) for fractional offset t in [0,1); taps are
// at source offsets {-1, 0, 1, 2}.
inline void catmull_rom_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = -0.5 * t3 + t2 - 0.5 * t;
  w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
  w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
  w[3] = 0.5 * t3 - 0.5 * t2;
}

}  // namespace

Image resize_bicubic(const Image& img, int out_h, int out_w) {
  if (img.height < 2 || img.width < 2)
    throw InvalidArgumentError("resize_bicubic requires a source of at least 2x2");
  if (out_h < 2 || out_w < 2)
    throw InvalidArgumentError("resize_bicubic requires output dims >= 2");

  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;

  // Horizontal pass: img.height x out_w.
  std::vector<double> cols(static_cast<std::size_t>(out_w));
  std::vector<int> base_x(static_cast<std::size_t>(out_w));
  std::vector<double> wx(static_cast<std::size_t>(out_w) * 4);
  for (int x = 0; x < out_w; ++x) {
    double src = (x + 0.5) * sx - 0.5;
    double fl = std::floor(src);
    base_x[x] = static_cast<int>(fl);
    catmull_rom_weights(src - fl, &wx[static_cast<std::size_t>(x) * 4]);
  }
  std::vector<double> tmp(static_cast<std::size_t>(img.height) * out_w);
  for (int y = 0; y < img.height; ++y) {
    const double* row = img.values.data() + static_cast<std::size_t>(y) * img.width;
    double* dst = tmp.data() + static_cast<std::size_t>(y) * out_w;
    for (int x = 0; x < out_w; ++x) {
      const double* w = &wx[static_cast<std::size_t>(x) * 4];
      double acc = 0.0;
      for (int t = 0; t < 4; ++t) {
        int sxi = std::clamp(base_x[x] + t - 1, 0, img.width - 1);
        acc += w[t] * row[sxi];
      }
      dst[x] = acc;
    }
  }

  Image out = Image::zeros(out_h, out_w);
  out.id = img.id;
  double wy[4];
  for (int y = 0; y < out_h; ++y) {
    double src = (y + 0.5) * sy - 0.5;
    double fl = std::floor(src);
    int base = static_cast<int>(fl);
    catmull_rom_weights(src - fl, wy);
    double* dst = out.values.data() + static_cast<std::size_t>(y) * out_w;
    for (int t = 0; t < 4; ++t) {
      int syi = std::clamp(base + t - 1, 0, img.height - 1);
      const double* srow = tmp.data() + static_cast<std::size_t>(syi) * out_w;
      const double c = wy[t];
      for (int x = 0; x < out_w; ++x) dst[x] += c * srow[x];
    }
  }
  return out;
}

Image normalize_minmax(const Image& img) {
  validate_image(img);
  auto [mn_it, mx_it] = std::minmax_element(img.values.begin(), img.values.end());
  double mn = *mn_it, mx = *mx_it;
  Image out = img;
  if (mx == mn) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    return out;
  }
  const double range = mx - mn;
  // Division keeps the extremes exactly 0 and 1, which makes the map
  // idempotent bit-for-bit.
  for (double& v : out.values) v = (v - mn) / range;
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  if (!(sigma > 0)) throw InvalidArgumentError("gaussian_blur requires sigma > 0");
  validate_image(img);
  Image out = Image::zeros(img.height, img.width);
  out.id = img.id;
  out.x_axis = img.x_axis;
  out.y_axis = img.y_axis;
  detail::BlurScratch scratch;
  detail::gaussian_blur_into(img.values.data(), img.height, img.width, sigma, out.values.data(),
                             scratch);
  return out;
}

Image gradient_magnitude(const Image& img) {
  if (img.height < 2 || img.width < 2)
    throw InvalidArgumentError("gradient_magnitude requires at least 2x2");
  Image out = Image::zeros(img.height, img.width);
  out.id = img.id;
  detail::gradient_magnitude_into(img.values.data(), img.height, img.width, out.values.data());
  return out;
}

Image transpose(const Image& img) {
  Image out = Image::zeros(img.width, img.height);
  out.id = img.id;
  out.x_axis = img.y_axis;
  out.y_axis = img.x_axis;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(y, x);
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  auto base = path.parent_path();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw ParseError("manifest line " + std::to_string(lineno) +
                       " is not id<TAB>path<TAB>label");
    ManifestEntry e;
    e.id = line.substr(0, t1);
    std::filesystem::path p = line.substr(t1 + 1, t2 - t1 - 1);
    e.path = p.is_absolute() ? p : base / p;
    e.label = label_from_string(line.substr(t2 + 1));
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write manifest " + path.string());
  for (const auto& e : entries)
    out << e.id << '\t' << e.path.generic_string() << '\t' << to_string(e.label) << '\n';
}

}  // namespace tvec
