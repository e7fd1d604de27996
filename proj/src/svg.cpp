#include "trianglevec/svg.hpp"

#include <cstdio>
#include <fstream>

#include "trianglevec/errors.hpp"

namespace tvec {

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

SvgWriter::SvgWriter(double width, double height) : width_(width), height_(height) {}

void SvgWriter::rect(double x, double y, double w, double h, const std::string& fill,
                     double opacity) {
  body_ << "<rect x=\"" << svg_num(x) << "\" y=\"" << svg_num(y) << "\" width=\"" << svg_num(w)
        << "\" height=\"" << svg_num(h) << "\" fill=\"" << fill << "\"";
  if (opacity != 1.0) body_ << " fill-opacity=\"" << svg_num(opacity) << "\"";
  body_ << "/>\n";
}

void SvgWriter::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width, const std::string& dash) {
  body_ << "<line x1=\"" << svg_num(x1) << "\" y1=\"" << svg_num(y1) << "\" x2=\"" << svg_num(x2)
        << "\" y2=\"" << svg_num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
        << svg_num(stroke_width) << "\"";
  if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
  body_ << "/>\n";
}

void SvgWriter::text(double x, double y, const std::string& content, double size,
                     const std::string& fill, const std::string& anchor) {
  body_ << "<text x=\"" << svg_num(x) << "\" y=\"" << svg_num(y) << "\" font-size=\""
        << svg_num(size) << "\" font-family=\"monospace\" fill=\"" << fill
        << "\" text-anchor=\"" << anchor << "\">" << escape(content) << "</text>\n";
}

void SvgWriter::polyline(const std::string& points, const std::string& stroke,
                         double stroke_width) {
  body_ << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"" << svg_num(stroke_width) << "\"/>\n";
}

std::string SvgWriter::str() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width_) +
         "\" height=\"" + svg_num(height_) + "\" viewBox=\"0 0 " + svg_num(width_) + " " +
         svg_num(height_) + "\">\n";
  out += body_.str();
  out += "</svg>\n";
  return out;
}

void SvgWriter::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << str();
}

}  // namespace tvec
