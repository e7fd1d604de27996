#pragma once

#include <filesystem>

#include "trianglevec/ebm.hpp"

namespace tvec {

/// Global importance bar chart + CSV.
void write_importance_csv(const std::vector<ImportanceEntry>& imp,
                          const std::filesystem::path& path);
void write_importance_svg(const std::vector<ImportanceEntry>& imp,
                          const std::filesystem::path& path);

/// Per-term score curve with per-class bin histograms.
void write_curve_csv(const EbmModel& model, std::string_view term,
                     const std::filesystem::path& path);
void write_curve_svg(const EbmModel& model, std::string_view term,
                     const std::filesystem::path& path);

/// Local contribution chart; the intercept is reported in the CSV and as a
/// caption, not as a bar.
void write_local_csv(const Explanation& ex, const std::filesystem::path& path);
void write_local_svg(const Explanation& ex, const std::filesystem::path& path);

}  // namespace tvec
