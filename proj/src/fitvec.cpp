#include "trianglevec/fitvec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "detail_filters.hpp"
#include "trianglevec/svg.hpp"

namespace tvec {

Bounds default_param_bounds(double sigma_lo, double sigma_hi) {
  Bounds b;
  // [m, r, b] per sigmoid (h, v, d), then theta, then sigma. Rates are
  // negative so walls rise toward the high-coordinate edges.
  for (int s = 0; s < 3; ++s) {
    b.lower.insert(b.lower.end(), {0.0, -10.0, 0.0});
    b.upper.insert(b.upper.end(), {1.5, 0.0, 64.0});
  }
  b.lower.push_back(0.0);
  b.upper.push_back(std::numbers::pi / 2);
  b.lower.push_back(sigma_lo);
  b.upper.push_back(sigma_hi);
  return b;
}

void FitConfig::validate() const {
  if (blend_weight < 0 || blend_weight > 1)
    throw InvalidArgumentError("blend_weight must lie in [0, 1]");
  if (!(penalty >= 1e6))
    throw InvalidArgumentError("penalty constant must be >= 1e6");
  if (!(sigma_lo > 0) || !(sigma_hi > sigma_lo))
    throw InvalidArgumentError("sigma bounds must satisfy 0 < lo < hi");
  if (param_bounds.dims() != kFitDims)
    throw InvalidArgumentError("param_bounds must cover the 11-D fit vector");
  param_bounds.validate();
}

Image transform_identity(const Image& img) { return img; }

Image transform_grad_gaussian(const Image& img, double sigma) {
  return gradient_magnitude(gaussian_blur(img, sigma));
}

namespace {

double l2_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

struct FitWorkspace {
  std::vector<double> render, blur_u, blur_v, grad_u, grad_v;
  detail::BlurScratch scratch;
};

FitWorkspace& workspace() {
  static thread_local FitWorkspace ws;
  return ws;
}

}  // namespace

double similarity(const Image& u, const Image& v, Transform t, double sigma) {
  if (!u.same_shape(v))
    throw InvalidArgumentError("similarity: images have different dimensions");
  const std::size_t n = u.values.size();
  if (t == Transform::identity) return l2_diff(u.values.data(), v.values.data(), n);
  FitWorkspace& ws = workspace();
  ws.blur_u.resize(n);
  ws.blur_v.resize(n);
  ws.grad_u.resize(n);
  ws.grad_v.resize(n);
  if (!(sigma > 0)) throw InvalidArgumentError("similarity: sigma must be > 0");
  detail::gaussian_blur_into(u.values.data(), u.height, u.width, sigma, ws.blur_u.data(),
                             ws.scratch);
  detail::gaussian_blur_into(v.values.data(), v.height, v.width, sigma, ws.blur_v.data(),
                             ws.scratch);
  detail::gradient_magnitude_into(ws.blur_u.data(), u.height, u.width, ws.grad_u.data());
  detail::gradient_magnitude_into(ws.blur_v.data(), v.height, v.width, ws.grad_v.data());
  return l2_diff(ws.grad_u.data(), ws.grad_v.data(), n);
}

std::array<double, kFitDims> pack_params(const TriangleParams& tp, double sigma) {
  return {tp.h.magnitude, tp.h.rate, tp.h.shift, tp.v.magnitude, tp.v.rate, tp.v.shift,
          tp.d.magnitude, tp.d.rate, tp.d.shift, tp.theta, sigma};
}

void unpack_params(std::span<const double> x, TriangleParams& tp, double& sigma) {
  if (x.size() != kFitDims)
    throw InvalidArgumentError("fit vector must have 11 dimensions");
  tp.h = {x[0], x[1], x[2]};
  tp.v = {x[3], x[4], x[5]};
  tp.d = {x[6], x[7], x[8]};
  tp.theta = x[9];
  sigma = x[10];
}

double objective(std::span<const double> x, const Image& img, const FitConfig& cfg) {
  TriangleParams tp;
  double sigma;
  unpack_params(x, tp, sigma);

  const int h = img.height, w = img.width;
  const std::size_t n = static_cast<std::size_t>(h) * w;
  FitWorkspace& ws = workspace();
  ws.render.resize(n);
  render_triangle_into(tp, h, w, ws.render.data());

  const double lambda = cfg.blend_weight;
  double value = 0.0;
  if (lambda < 1.0)
    value += (1.0 - lambda) * l2_diff(img.values.data(), ws.render.data(), n);
  if (lambda > 0.0) {
    const double sig = std::clamp(sigma, cfg.sigma_lo, cfg.sigma_hi);
    ws.blur_u.resize(n);
    ws.blur_v.resize(n);
    ws.grad_u.resize(n);
    ws.grad_v.resize(n);
    detail::gaussian_blur_into(img.values.data(), h, w, sig, ws.blur_u.data(), ws.scratch);
    detail::gaussian_blur_into(ws.render.data(), h, w, sig, ws.blur_v.data(), ws.scratch);
    detail::gradient_magnitude_into(ws.blur_u.data(), h, w, ws.grad_u.data());
    detail::gradient_magnitude_into(ws.blur_v.data(), h, w, ws.grad_v.data());
    value += lambda * l2_diff(ws.grad_u.data(), ws.grad_v.data(), n);
  }

  bool feasible = check_constraints(tp, h, w).empty() && sigma >= cfg.sigma_lo &&
                  sigma <= cfg.sigma_hi;
  return feasible ? value : cfg.penalty + value;
}

FitResult fit_synthetic(const Image& img, const FitConfig& cfg) {
  cfg.validate();
  validate_image(img);
  DeResult r = differential_evolution(
      [&img, &cfg](std::span<const double> x) { return objective(x, img, cfg); },
      cfg.param_bounds, cfg.de);
  FitResult fr;
  unpack_params(r.x, fr.params, fr.sigma_star);
  fr.fitness = r.fun;
  fr.evals = r.evals;
  if (!(r.fun < cfg.penalty))
    throw FitFailedError("fit ended on the penalty plateau (F=" + std::to_string(r.fun) + ")",
                         fr.params, r.fun);
  return fr;
}

const std::vector<std::string>& synth_feature_names() {
  static const std::vector<std::string> names = {"sigma_star", "H_B", "H_M", "H_R",
                                                 "V_B",        "V_M", "V_R", "D_B",
                                                 "D_M",        "D_R", "D_theta", "F"};
  return names;
}

FeatureVector vectorize_synth(const FitResult& fr) {
  FeatureVector fv;
  fv.names = synth_feature_names();
  const TriangleParams& t = fr.params;
  fv.values = {fr.sigma_star, t.h.shift, t.h.magnitude, t.h.rate,
               t.v.shift,     t.v.magnitude, t.v.rate,
               t.d.shift,     t.d.magnitude, t.d.rate,
               t.theta,       fr.fitness};
  return fv;
}

FeatureVector hybrid_vector(const FeatureVector& synth, const Image& img,
                            const Filterbank& bank) {
  if (synth.names != synth_feature_names())
    throw InvalidArgumentError("hybrid_vector expects the 12-feature synthetic layout");
  int idx = -1;
  for (std::size_t i = 0; i < bank.names.size(); ++i)
    if (bank.names[i] == kHybridGaborFeature) idx = static_cast<int>(i);
  if (idx < 0)
    throw InvalidArgumentError(std::string("filterbank has no ") + kHybridGaborFeature +
                               " kernel");
  FeatureVector fv = synth;
  fv.names.push_back(kHybridGaborFeature);
  fv.values.push_back(response_norm(img, bank.kernels[static_cast<std::size_t>(idx)]));
  return fv;
}

void write_fit_overlay_svg(const Image& img, const FitResult& fr,
                           const std::filesystem::path& path) {
  const double scale = 5.0;
  const double size_x = img.width * scale, size_y = img.height * scale;
  SvgWriter svg(size_x, size_y + 18);

  // Coarse 8x8-pixel blocks of the image as the backdrop.
  const int block = 8;
  for (int by = 0; by < img.height; by += block)
    for (int bx = 0; bx < img.width; bx += block) {
      double acc = 0.0;
      int cnt = 0;
      for (int y = by; y < std::min(by + block, img.height); ++y)
        for (int x = bx; x < std::min(bx + block, img.width); ++x, ++cnt) acc += img.at(y, x);
      int level = static_cast<int>(std::clamp(acc / std::max(cnt, 1), 0.0, 1.0) * 255.0);
      char color[8];
      std::snprintf(color, sizeof color, "#%02x%02x%02x", level, level, level);
      svg.rect(bx * scale, by * scale, block * scale, block * scale, color);
    }

  const TriangleParams& t = fr.params;
  svg.line(t.h.shift * scale, 0, t.h.shift * scale, size_y, "#e41a1c", 1.5);
  svg.line(0, t.v.shift * scale, size_x, t.v.shift * scale, "#377eb8", 1.5);

  // Diagonal boundary: x*sin(theta) + y*cos(theta) = D_B clipped to the grid.
  const double st = std::sin(t.theta), ct = std::cos(t.theta);
  std::vector<std::pair<double, double>> pts;
  auto try_point = [&](double x, double y) {
    if (x >= 0 && x <= img.width && y >= 0 && y <= img.height) pts.emplace_back(x, y);
  };
  if (std::abs(ct) > 1e-9) {
    try_point(0.0, t.d.shift / ct);
    try_point(img.width, (t.d.shift - img.width * st) / ct);
  }
  if (std::abs(st) > 1e-9) {
    try_point(t.d.shift / st, 0.0);
    try_point((t.d.shift - img.height * ct) / st, img.height);
  }
  if (pts.size() >= 2)
    svg.line(pts[0].first * scale, pts[0].second * scale, pts[1].first * scale,
             pts[1].second * scale, "#4daf4a", 1.5, "4,3");

  svg.text(2, size_y + 13,
           "H_B=" + svg_num(t.h.shift) + " V_B=" + svg_num(t.v.shift) + " D_B=" +
               svg_num(t.d.shift) + " theta=" + svg_num(t.theta) + " F=" + svg_num(fr.fitness),
           9.0);
  svg.save(path);
}

}  // namespace tvec
