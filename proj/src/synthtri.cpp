#include "trianglevec/synthtri.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "trianglevec/errors.hpp"
#include "trianglevec/features.hpp"

namespace tvec {

double sigmoid(double x, const SigmoidParams& p) {
  double e = std::clamp(p.rate * (x - p.shift), -500.0, 500.0);
  return p.magnitude / (1.0 + std::exp(e));
}

std::vector<std::string> check_constraints(const TriangleParams& tp, int grid_h, int grid_w,
                                           double rate_max) {
  std::vector<std::string> v;
  auto check_sigmoid = [&](const SigmoidParams& s, const char* name, double shift_hi) {
    if (!std::isfinite(s.magnitude) || !std::isfinite(s.rate) || !std::isfinite(s.shift)) {
      v.push_back(std::string(name) + ": non-finite parameter");
      return;
    }
    if (s.magnitude < 0) v.push_back(std::string(name) + ".m: negative magnitude (must be >= 0)");
    if (std::abs(s.rate) > rate_max)
      v.push_back(std::string(name) + ".r: |rate| exceeds bound " + std::to_string(rate_max));
    if (shift_hi > 0 && s.magnitude > 0 && (s.shift < 0 || s.shift >= shift_hi))
      v.push_back(std::string(name) + ".b: wall shift outside [0, " + std::to_string(shift_hi) +
                  ")");
  };
  check_sigmoid(tp.h, "h", static_cast<double>(grid_w));
  check_sigmoid(tp.v, "v", static_cast<double>(grid_h));
  check_sigmoid(tp.d, "d", 0.0);  // the diagonal shift is a projected coordinate
  if (!std::isfinite(tp.d.shift) || tp.d.shift < 0)
    v.push_back("d.b: diagonal shift must be finite and >= 0");
  if (!std::isfinite(tp.theta) || tp.theta < 0 || tp.theta > std::numbers::pi / 2)
    v.push_back("theta: outside [0, pi/2]");
  return v;
}

void render_triangle_into(const TriangleParams& tp, int h, int w, double* out) {
  // The diagonal term dominates the cost; its exponent is linear in x per
  // row, so each row splits into two saturated segments and a transition
  // band, and exp() runs only inside the band.
  static thread_local std::vector<double> col_h, row_v;
  col_h.resize(static_cast<std::size_t>(w));
  row_v.resize(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) col_h[x] = sigmoid(x, tp.h);
  for (int y = 0; y < h; ++y) row_v[y] = sigmoid(y, tp.v);

  const double st = std::sin(tp.theta), ct = std::cos(tp.theta);
  const double rd = tp.d.rate, md = tp.d.magnitude;
  const double slope = rd * st;  // d exponent per unit x
  constexpr double kBand = 40.0;
  const double* __restrict ch = col_h.data();
  for (int y = 0; y < h; ++y) {
    const double c = rd * (ct * y - tp.d.shift);
    const double sv = row_v[y];
    double* __restrict dst = out + static_cast<std::size_t>(y) * w;
    int x0 = 0, x1 = w;
    if (slope != 0.0) {
      double lo = (-kBand - c) / slope, hi = (kBand - c) / slope;
      if (lo > hi) std::swap(lo, hi);
      x0 = static_cast<int>(std::clamp(std::ceil(lo), 0.0, static_cast<double>(w)));
      x1 = static_cast<int>(std::clamp(std::floor(hi) + 1.0, static_cast<double>(x0),
                                       static_cast<double>(w)));
    } else if (c > kBand || c < -kBand) {
      x0 = x1 = w;  // whole row saturated
    }
    const double sd_left = c > 0.0 ? 0.0 : md;
    const double sd_right = slope * (w - 1) + c > 0.0 ? 0.0 : md;
    const double base_left = std::max(sv, sd_left);
    const double base_right = std::max(sv, sd_right);
    for (int x = 0; x < x0; ++x) dst[x] = std::max(ch[x], base_left);
    for (int x = x0; x < x1; ++x) {
      const double sd = md / (1.0 + std::exp(slope * x + c));
      dst[x] = std::max(ch[x], std::max(sv, sd));
    }
    for (int x = x1; x < w; ++x) dst[x] = std::max(ch[x], base_right);
  }
}

Image render_triangle(const TriangleParams& tp, int h, int w) {
  if (h < 2 || w < 2) throw InvalidArgumentError("render_triangle requires h, w >= 2");
  auto violations = check_constraints(tp, h, w);
  if (!violations.empty()) {
    std::string msg = "invalid triangle parameters:";
    for (const auto& s : violations) msg += " [" + s + "]";
    throw InvalidArgumentError(msg);
  }
  Image img = Image::zeros(h, w);
  render_triangle_into(tp, h, w, img.values.data());
  return img;
}

namespace {

/// Marks pixels where the diagonal term strictly dominates both walls and
/// half its own magnitude. Returns the pixel count.
int dominance_mask(const TriangleParams& tp, int h, int w, std::vector<unsigned char>* mask) {
  if (mask) mask->assign(static_cast<std::size_t>(h) * w, 0);
  const double st = std::sin(tp.theta), ct = std::cos(tp.theta);
  const double half = tp.d.magnitude / 2.0;
  int count = 0;
  for (int y = 0; y < h; ++y) {
    const double sv = sigmoid(y, tp.v);
    for (int x = 0; x < w; ++x) {
      double sd = sigmoid(st * x + ct * y, tp.d);
      if (sd > sigmoid(x, tp.h) && sd > sv && sd > half) {
        ++count;
        if (mask) (*mask)[static_cast<std::size_t>(y) * w + x] = 1;
      }
    }
  }
  return count;
}

}  // namespace

bool has_triangle_region(const TriangleParams& tp, int h, int w) {
  int count = dominance_mask(tp, h, w, nullptr);
  return count >= 0.02 * static_cast<double>(h) * w;
}

const char* to_string(AmbiguousMode m) {
  switch (m) {
    case AmbiguousMode::dropout:
      return "dropout";
    case AmbiguousMode::vertical_fringe:
      return "vertical-fringe";
    case AmbiguousMode::oversized_triangle:
      return "oversized-triangle";
  }
  return "?";
}

AmbiguousMode ambiguous_mode_from_string(std::string_view s) {
  if (s == "dropout") return AmbiguousMode::dropout;
  if (s == "vertical-fringe") return AmbiguousMode::vertical_fringe;
  if (s == "oversized-triangle") return AmbiguousMode::oversized_triangle;
  throw ParseError("unknown ambiguous mode '" + std::string(s) + "'");
}

namespace {

constexpr int kGrid = 64;

SigmoidParams draw_wall(Rng& rng) {
  SigmoidParams p;
  p.magnitude = rng.uniform(0.6, 1.0);
  p.rate = rng.uniform(-8.0, -3.0);
  p.shift = rng.uniform(46.0, 58.0);
  return p;
}

TriangleParams draw_good_candidate(Rng& rng) {
  TriangleParams tp;
  tp.h = draw_wall(rng);
  tp.v = draw_wall(rng);
  tp.d.magnitude = rng.uniform(0.5, 1.0);
  tp.d.rate = rng.uniform(-6.0, -1.5);
  tp.d.shift = rng.uniform(28.0, 46.0);
  tp.theta = rng.uniform(0.35, 1.2);
  return tp;
}

void add_ridge(Image& img, const TriangleParams& tp, double amplitude, double period,
               bool vertical) {
  if (amplitude == 0.0) return;
  std::vector<unsigned char> mask;
  dominance_mask(tp, img.height, img.width, &mask);
  const double st = vertical ? 1.0 : std::sin(tp.theta);
  const double ct = vertical ? 0.0 : std::cos(tp.theta);
  const double k = 2.0 * std::numbers::pi / period;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      if (mask[i]) img.values[i] += amplitude * std::sin(k * (st * x + ct * y));
    }
}

}  // namespace

TriangleParams sample_good_params(Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    TriangleParams tp = draw_good_candidate(rng);
    if (has_triangle_region(tp, kGrid, kGrid)) return tp;
  }
  throw DataError("could not draw good triangle parameters after 1000 attempts");
}

std::vector<CorpusSample> generate_corpus_detailed(const CorpusSpec& spec) {
  if (spec.n <= 0) throw InvalidArgumentError("corpus size must be > 0");
  if (spec.good_fraction < 0 || spec.good_fraction > 1)
    throw InvalidArgumentError("good_fraction must be in [0,1]");
  if (spec.noise_sigma < 0) throw InvalidArgumentError("noise_sigma must be >= 0");
  if (spec.ridge_period <= 0) throw InvalidArgumentError("ridge_period must be > 0");

  const int n_good = static_cast<int>(std::floor(spec.n * spec.good_fraction + 0.5));
  const std::vector<AmbiguousMode> modes(spec.ambiguous_modes.begin(),
                                         spec.ambiguous_modes.end());
  std::vector<CorpusSample> samples;
  samples.reserve(static_cast<std::size_t>(spec.n));

  for (int i = 0; i < spec.n; ++i) {
    Rng rng(splitmix64(spec.seed ^ static_cast<std::uint64_t>(i)));
    CorpusSample s;
    const bool good = i < n_good;
    if (good) {
      s.truth = sample_good_params(rng);
      s.mode = "good";
      s.labeled.image = render_triangle(s.truth, kGrid, kGrid);
      add_ridge(s.labeled.image, s.truth, spec.ridge_amplitude, spec.ridge_period, false);
    } else {
      const int ordinal = i - n_good;
      const int variant = modes.empty() ? 0 : ordinal % (1 + static_cast<int>(modes.size()));
      if (variant == 0) {
        s.truth = draw_good_candidate(rng);
        s.truth.d.magnitude = 0.0;
        s.mode = "walls";
        s.labeled.image = render_triangle(s.truth, kGrid, kGrid);
      } else {
        AmbiguousMode mode = modes[static_cast<std::size_t>(variant - 1)];
        s.truth = sample_good_params(rng);
        s.mode = to_string(mode);
        switch (mode) {
          case AmbiguousMode::dropout: {
            s.labeled.image = render_triangle(s.truth, kGrid, kGrid);
            add_ridge(s.labeled.image, s.truth, spec.ridge_amplitude, spec.ridge_period, false);
            std::vector<unsigned char> mask;
            int count = dominance_mask(s.truth, kGrid, kGrid, &mask);
            int pick = count > 0 ? static_cast<int>(rng.below(static_cast<std::uint64_t>(count)))
                                 : 0;
            int cx = kGrid / 2, cy = kGrid / 2;
            for (int y = 0, seen = 0; y < kGrid && count > 0; ++y)
              for (int x = 0; x < kGrid; ++x)
                if (mask[static_cast<std::size_t>(y) * kGrid + x] && seen++ == pick) {
                  cx = x;
                  cy = y;
                  y = kGrid;
                  break;
                }
            double radius = rng.uniform(4.0, 10.0);
            for (int y = 0; y < kGrid; ++y)
              for (int x = 0; x < kGrid; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius)
                  s.labeled.image.at(y, x) = 0.0;
            break;
          }
          case AmbiguousMode::vertical_fringe:
            s.labeled.image = render_triangle(s.truth, kGrid, kGrid);
            add_ridge(s.labeled.image, s.truth, spec.ridge_amplitude, spec.ridge_period, true);
            break;
          case AmbiguousMode::oversized_triangle:
            s.truth.d.shift = rng.uniform(2.0, 8.0);
            s.labeled.image = render_triangle(s.truth, kGrid, kGrid);
            add_ridge(s.labeled.image, s.truth, spec.ridge_amplitude, spec.ridge_period, false);
            break;
        }
      }
    }
    if (spec.noise_sigma > 0)
      for (double& v : s.labeled.image.values) v += spec.noise_sigma * rng.normal();
    s.labeled.image = normalize_minmax(s.labeled.image);
    char idbuf[24];
    std::snprintf(idbuf, sizeof idbuf, "tri_%06d", i);
    s.labeled.image.id = idbuf;
    s.labeled.label = good ? Label::good : Label::bad;
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<LabeledImage> generate_corpus(const CorpusSpec& spec) {
  auto detailed = generate_corpus_detailed(spec);
  std::vector<LabeledImage> out;
  out.reserve(detailed.size());
  for (auto& s : detailed) out.push_back(std::move(s.labeled));
  return out;
}

std::filesystem::path write_corpus(const std::vector<CorpusSample>& samples,
                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  std::vector<ManifestEntry> manifest;
  std::ofstream gt(dir / "ground_truth.tsv");
  if (!gt) throw ParseError("cannot write ground truth sidecar in " + dir.string());
  for (const auto& s : samples) {
    const std::string rel = "images/" + s.labeled.image.id + ".csv";
    save_image_csv(s.labeled.image, dir / rel);
    manifest.push_back({s.labeled.image.id, rel, s.labeled.label});
    const TriangleParams& t = s.truth;
    gt << s.labeled.image.id;
    for (double v : {t.h.magnitude, t.h.rate, t.h.shift, t.v.magnitude, t.v.rate, t.v.shift,
                     t.d.magnitude, t.d.rate, t.d.shift, t.theta})
      gt << '\t' << format_double(v);
    gt << '\t' << s.mode << '\t' << to_string(s.labeled.label) << '\n';
  }
  auto manifest_path = dir / "manifest.tsv";
  write_manifest(manifest, manifest_path);
  return manifest_path;
}

std::vector<GroundTruthEntry> read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<GroundTruthEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    GroundTruthEntry e;
    TriangleParams& t = e.params;
    std::string label;
    if (!(ss >> e.id >> t.h.magnitude >> t.h.rate >> t.h.shift >> t.v.magnitude >> t.v.rate >>
          t.v.shift >> t.d.magnitude >> t.d.rate >> t.d.shift >> t.theta >> e.mode >> label))
      throw ParseError("bad ground truth line: " + line);
    e.label = label_from_string(label);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace tvec
