#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trianglevec/ebm.hpp"
#include "trianglevec/gabor.hpp"
#include "trianglevec/image.hpp"

namespace tvec {

struct CvProtocol {
  int runs = 5;
  int k = 6;
  double holdout_fraction = 0.10;
  std::uint64_t seed = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Confusion is indexed [real][predicted] with 0 = good, 1 = bad.
/// type1 = real bad predicted good, type2 = real good predicted bad,
/// both as fractions of all evaluated samples (percent).
struct Metrics {
  MeanStd accuracy;  // percent
  MeanStd type1;     // percent
  MeanStd type2;     // percent
  std::array<std::array<MeanStd, 2>, 2> confusion{};
  double evaluated = 0.0;  // samples per run
};

/// Per-class shuffled round-robin fold assignment; deterministic per seed.
std::vector<int> stratified_kfold(const std::vector<Label>& labels, int k, std::uint64_t seed);

/// Stratified holdout mask: true = held out. At least k samples per class
/// stay in the pool. Shared by cross_validate and the final-model training
/// path so both see the same split.
std::vector<bool> stratified_holdout(const std::vector<Label>& labels, double fraction, int k,
                                     std::uint64_t seed);

Metrics compute_metrics(const std::vector<Label>& predictions, const std::vector<Label>& labels);

struct CvOutcome {
  Metrics cv;       // aggregated over CV test folds, mean +- std across runs
  Metrics holdout;  // model trained on all non-holdout data, scored on holdout
};

/// Per run: stratified holdout removed, k-fold CV on the remainder,
/// confusion aggregated over folds; mean +- sample std across runs.
CvOutcome cross_validate(const Matrix& x, const std::vector<Label>& y, const CvProtocol& proto,
                         const EbmConfig& cfg, std::vector<std::string> feature_names = {});

/// value(uncertainty) table in the style of the metrics report.
std::string format_metrics_report(const Metrics& m, std::string_view title);
std::string metrics_csv_row(const Metrics& m, std::string_view name);
inline constexpr const char* kMetricsCsvHeader =
    "model,accuracy,accuracy_std,type1,type1_std,type2,type2_std,"
    "good_good,good_bad,bad_good,bad_bad";

/// Iteratively drops filters whose mean-absolute-score importance falls
/// below drop_threshold * max importance until a fixpoint is reached.
/// Refinement features are the response norms of the surviving bank.
Filterbank refine_filterbank(const std::vector<LabeledImage>& data, const Filterbank& initial,
                             const EbmConfig& cfg, double drop_threshold = 0.05);

}  // namespace tvec
