#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trianglevec/image.hpp"

namespace tvec {

/// Named feature values; names and values are positionally aligned.
struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  /// Throws InvalidArgumentError when the feature is absent.
  double at(std::string_view name) const;
  int index_of(std::string_view name) const;  // -1 when absent
};

/// A rectangular feature dataset as read from / written to CSV.
struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;
  bool has_labels = false;

  FeatureVector row_vector(std::size_t i) const { return {feature_names, rows[i]}; }
};

/// Header: id,<feature names...>[,label]. Values round-trip exactly.
void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_feature_csv(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace tvec
