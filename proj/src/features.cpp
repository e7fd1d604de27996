#include "trianglevec/features.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "trianglevec/errors.hpp"

namespace tvec {

std::string format_double(double v) {
  char buf[40];
  // %.17g always round-trips; prefer the shortest representation that does.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

int FeatureVector::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

double FeatureVector::at(std::string_view name) const {
  int i = index_of(name);
  if (i < 0) throw InvalidArgumentError("missing feature '" + std::string(name) + "'");
  return values[static_cast<std::size_t>(i)];
}

void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "id";
  for (const auto& n : table.feature_names) out << ',' << n;
  if (table.has_labels) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    out << table.ids[i];
    for (double v : table.rows[i]) out << ',' << format_double(v);
    if (table.has_labels) out << ',' << to_string(table.labels[i]);
    out << '\n';
  }
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  FeatureTable table;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty feature CSV " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> header;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
    if (header.empty() || header.front() != "id")
      throw ParseError("feature CSV must start with an 'id' column: " + path.string());
    table.has_labels = !header.empty() && header.back() == "label";
    std::size_t n_features = header.size() - 1 - (table.has_labels ? 1 : 0);
    table.feature_names.assign(header.begin() + 1, header.begin() + 1 + n_features);
    if (table.feature_names.empty())
      throw ParseError("feature CSV has no feature columns: " + path.string());
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    std::size_t expected = 1 + table.feature_names.size() + (table.has_labels ? 1 : 0);
    if (cells.size() != expected)
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(expected) + " cells, got " + std::to_string(cells.size()));
    table.ids.push_back(cells[0]);
    std::vector<double> row;
    row.reserve(table.feature_names.size());
    for (std::size_t i = 1; i <= table.feature_names.size(); ++i) {
      double v;
      try {
        v = std::stod(cells[i]);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad value '" + cells[i] + "'");
      }
      if (!std::isfinite(v))
        throw ParseError("line " + std::to_string(lineno) + ": non-finite feature value");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
    if (table.has_labels) table.labels.push_back(label_from_string(cells.back()));
  }
  return table;
}

}  // namespace tvec
