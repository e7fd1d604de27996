#include "trianglevec/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "trianglevec/errors.hpp"
#include "trianglevec/svg.hpp"

namespace tvec {

void write_importance_csv(const std::vector<ImportanceEntry>& imp,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "term,mean_abs_score\n";
  for (const auto& e : imp) out << e.name << ',' << format_double(e.importance) << '\n';
}

void write_importance_svg(const std::vector<ImportanceEntry>& imp,
                          const std::filesystem::path& path) {
  const double row_h = 18.0, label_w = 140.0, bar_w = 260.0;
  const double height = 24.0 + row_h * static_cast<double>(imp.size());
  SvgWriter svg(label_w + bar_w + 60.0, height);
  svg.text(4, 14, "mean absolute score", 11.0);
  double max_imp = 1e-300;
  for (const auto& e : imp) max_imp = std::max(max_imp, e.importance);
  for (std::size_t i = 0; i < imp.size(); ++i) {
    const double y = 24.0 + row_h * static_cast<double>(i);
    svg.text(label_w - 4, y + 12, imp[i].name, 10.0, "#000000", "end");
    const double w = bar_w * imp[i].importance / max_imp;
    svg.rect(label_w, y + 3, w, row_h - 6, "#4c72b0");
    svg.text(label_w + w + 4, y + 12, svg_num(imp[i].importance), 9.0, "#555555");
  }
  svg.save(path);
}

void write_curve_csv(const EbmModel& model, std::string_view term,
                     const std::filesystem::path& path) {
  auto curve = feature_curve(model, term);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "value,score,hist_good,hist_bad\n";
  for (const auto& p : curve)
    out << format_double(p.value) << ',' << format_double(p.score) << ','
        << format_double(p.hist_good) << ',' << format_double(p.hist_bad) << '\n';
}

void write_curve_svg(const EbmModel& model, std::string_view term,
                     const std::filesystem::path& path) {
  auto curve = feature_curve(model, term);
  const double w = 420.0, curve_h = 180.0, hist_h = 70.0, pad = 34.0;
  SvgWriter svg(w, curve_h + hist_h + 3 * pad);
  svg.text(pad, 16, std::string(term) + " score (log odds toward good)", 11.0);

  double vmin = curve.front().value, vmax = curve.back().value;
  if (vmax == vmin) vmax = vmin + 1.0;
  double smin = 0.0, smax = 0.0, hmax = 1e-300;
  for (const auto& p : curve) {
    smin = std::min(smin, p.score);
    smax = std::max(smax, p.score);
    hmax = std::max({hmax, p.hist_good, p.hist_bad});
  }
  if (smax == smin) smax = smin + 1.0;
  auto sx = [&](double v) { return pad + (w - 2 * pad) * (v - vmin) / (vmax - vmin); };
  auto sy = [&](double s) { return pad + curve_h * (smax - s) / (smax - smin); };

  svg.line(pad, sy(0.0), w - pad, sy(0.0), "#bbbbbb", 0.8, "3,3");
  std::string pts;
  for (const auto& p : curve) pts += svg_num(sx(p.value)) + "," + svg_num(sy(p.score)) + " ";
  svg.polyline(pts, "#dd8452", 1.6);

  const double hist_top = curve_h + 2 * pad;
  svg.text(pad, hist_top - 6, "class histogram (good/bad)", 9.0, "#555555");
  const double bw = (w - 2 * pad) / static_cast<double>(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double x0 = pad + bw * static_cast<double>(i);
    const double hg = hist_h * curve[i].hist_good / hmax;
    const double hb = hist_h * curve[i].hist_bad / hmax;
    svg.rect(x0, hist_top + hist_h - hg, bw * 0.45, hg, "#17becf", 0.9);
    svg.rect(x0 + bw * 0.5, hist_top + hist_h - hb, bw * 0.45, hb, "#e377c2", 0.9);
  }
  svg.text(pad, hist_top + hist_h + 16, svg_num(vmin), 9.0, "#555555");
  svg.text(w - pad, hist_top + hist_h + 16, svg_num(vmax), 9.0, "#555555", "end");
  svg.save(path);
}

void write_local_csv(const Explanation& ex, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "term,contribution\n";
  out << "(intercept)," << format_double(ex.intercept) << '\n';
  for (const auto& [name, v] : ex.per_term) out << name << ',' << format_double(v) << '\n';
  out << "(total)," << format_double(ex.total) << '\n';
}

void write_local_svg(const Explanation& ex, const std::filesystem::path& path) {
  const double row_h = 18.0, label_w = 140.0, half_w = 150.0;
  const double height = 42.0 + row_h * static_cast<double>(ex.per_term.size());
  SvgWriter svg(label_w + 2 * half_w + 20.0, height);
  svg.text(4, 14, std::string("prediction: ") + to_string(ex.predicted) + "  total=" +
                      svg_num(ex.total) + "  (intercept " + svg_num(ex.intercept) +
                      " shown separately)",
           10.0);
  double max_abs = 1e-300;
  for (const auto& [name, v] : ex.per_term) max_abs = std::max(max_abs, std::abs(v));
  const double mid = label_w + half_w;
  svg.line(mid, 24, mid, height - 14, "#bbbbbb", 0.8);
  for (std::size_t i = 0; i < ex.per_term.size(); ++i) {
    const double y = 28.0 + row_h * static_cast<double>(i);
    const auto& [name, v] = ex.per_term[i];
    svg.text(label_w - 4, y + 12, name, 10.0, "#000000", "end");
    const double w = half_w * std::abs(v) / max_abs;
    if (v >= 0)
      svg.rect(mid, y + 3, w, row_h - 6, "#17becf");
    else
      svg.rect(mid - w, y + 3, w, row_h - 6, "#e377c2");
    svg.text(mid + (v >= 0 ? w + 4 : -w - 4), y + 12, svg_num(v), 9.0, "#555555",
             v >= 0 ? "start" : "end");
  }
  svg.save(path);
}

}  // namespace tvec
