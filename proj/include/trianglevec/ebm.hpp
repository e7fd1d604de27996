#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trianglevec/features.hpp"
#include "trianglevec/image.hpp"

namespace tvec {

using Matrix = std::vector<std::vector<double>>;  // rows = samples

struct EbmConfig {
  int n_bins = 256;            // quantile bins per feature
  double learning_rate = 0.01;
  int max_rounds = 5000;       // one round = one cyclic sweep over features
  int greedy_rounds = 0;       // greedy single-feature updates appended per sweep
  int smoothing_window = 3;    // post-hoc moving average over bin scores
  int outer_bags = 8;          // 1 disables bagging and early stopping
  int early_stop_patience = 50;
  int n_pairs = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EbmTerm {
  std::string name;
  std::vector<double> edges;   // strictly increasing cut points
  std::vector<double> scores;  // per-bin additive log-odds, edges.size()+1 entries
  std::vector<double> hist_good;  // training counts per bin, per class
  std::vector<double> hist_bad;
  double data_min = 0.0;
  double data_max = 0.0;
};

struct EbmPairTerm {
  int feature_a = 0;
  int feature_b = 0;
  std::vector<double> edges_a;
  std::vector<double> edges_b;
  int rows = 0;
  int cols = 0;
  std::vector<double> scores;  // rows*cols grid, row-major

  double at(int i, int j) const { return scores[static_cast<std::size_t>(i) * cols + j]; }
};

/// Additive log-odds model; good is the positive class.
struct EbmModel {
  double intercept = 0.0;
  std::vector<std::string> feature_names;
  std::vector<EbmTerm> terms;
  std::vector<EbmPairTerm> pair_terms;
  EbmConfig config;
};

struct Explanation {
  std::vector<std::pair<std::string, double>> per_term;  // sorted by |value| desc
  double intercept = 0.0;
  double total = 0.0;
  Label predicted = Label::bad;
};

/// Bin index for a value given ascending cut points: bin i covers
/// [edge_{i-1}, edge_i); everything below the first edge is bin 0 and at or
/// above the last edge is the last bin.
int bin_index(const std::vector<double>& edges, double x);

/// Quantile cut points (linear interpolation), duplicates collapsed. When a
/// feature has <= n_bins distinct values the edges are the midpoints between
/// consecutive distinct values.
std::vector<std::vector<double>> bin_features(const Matrix& x, int n_bins);

/// Cyclic gradient boosting of per-feature mini-trees (<= 3 leaves) on
/// logistic residuals, bagged and merged bin-wise. Deterministic per seed.
EbmModel train_ebm(const Matrix& x, const std::vector<Label>& y, const EbmConfig& cfg,
                   std::vector<std::string> feature_names = {});

double predict_score(const EbmModel& model, const FeatureVector& fv);
/// Fast path: values aligned with model.feature_names.
double predict_score(const EbmModel& model, std::span<const double> values);

Label predict_class(const EbmModel& model, const FeatureVector& fv, double threshold = 0.0);
Label predict_class(const EbmModel& model, std::span<const double> values, double threshold = 0.0);

struct ImportanceEntry {
  std::string name;
  double importance = 0.0;
};

/// Mean absolute per-term contribution over the reference rows, sorted
/// descending.
std::vector<ImportanceEntry> feature_importance(const EbmModel& model, const Matrix& x);

struct CurvePoint {
  double value = 0.0;
  double score = 0.0;
  double hist_good = 0.0;
  double hist_bad = 0.0;
};

/// One sample per bin at edge midpoints; outermost bins use the training
/// data min/max.
std::vector<CurvePoint> feature_curve(const EbmModel& model, std::string_view term_name);

Explanation explain_local(const EbmModel& model, const FeatureVector& fv);

/// Versioned structured text; round-trips bit-exactly.
void save_ebm(const EbmModel& model, const std::filesystem::path& path);
EbmModel load_ebm(const std::filesystem::path& path);

}  // namespace tvec
