#pragma once

#include <filesystem>
#include <sstream>
#include <string>

namespace tvec {

/// Minimal deterministic SVG emitter; no timestamps, fixed number
/// formatting.
class SvgWriter {
 public:
  SvgWriter(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0, const std::string& dash = "");
  void text(double x, double y, const std::string& content, double size = 10.0,
            const std::string& fill = "#000000", const std::string& anchor = "start");
  void polyline(const std::string& points, const std::string& stroke, double stroke_width = 1.0);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  double width_, height_;
  std::ostringstream body_;
};

std::string svg_num(double v);

}  // namespace tvec
