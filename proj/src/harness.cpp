#include "trianglevec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "trianglevec/errors.hpp"
#include "trianglevec/rng.hpp"

namespace tvec {

std::vector<int> stratified_kfold(const std::vector<Label>& labels, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgumentError("stratified_kfold requires k >= 2");
  std::vector<int> folds(labels.size(), -1);
  Rng rng(splitmix64(seed));
  for (int cls = 0; cls < 2; ++cls) {
    const Label want = cls == 0 ? Label::good : Label::bad;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == want) idx.push_back(i);
    if (static_cast<int>(idx.size()) < k)
      throw DataError(std::string("class '") + to_string(want) + "' has " +
                      std::to_string(idx.size()) + " samples, fewer than k=" + std::to_string(k));
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j)
      folds[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return folds;
}

std::vector<bool> stratified_holdout(const std::vector<Label>& labels, double fraction, int k,
                                     std::uint64_t seed) {
  std::vector<bool> held(labels.size(), false);
  Rng rng(seed);
  for (int cls = 0; cls < 2; ++cls) {
    const Label want = cls == 0 ? Label::good : Label::bad;
    std::vector<int> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == want) idx.push_back(static_cast<int>(i));
    rng.shuffle(idx);
    int n_hold = static_cast<int>(std::floor(fraction * static_cast<double>(idx.size()) + 0.5));
    n_hold = std::max(0, std::min(n_hold, static_cast<int>(idx.size()) - k));
    for (int j = 0; j < n_hold; ++j) held[static_cast<std::size_t>(idx[j])] = true;
  }
  return held;
}

namespace {

struct Confusion {
  // counts[real][pred], 0 = good, 1 = bad
  double counts[2][2] = {{0, 0}, {0, 0}};

  double total() const { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }
  double accuracy() const { return 100.0 * (counts[0][0] + counts[1][1]) / total(); }
  double type1() const { return 100.0 * counts[1][0] / total(); }  // real bad -> pred good
  double type2() const { return 100.0 * counts[0][1] / total(); }  // real good -> pred bad
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd ms;
  if (v.empty()) return ms;
  for (double x : v) ms.mean += x;
  ms.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - ms.mean) * (x - ms.mean);
    ms.std = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return ms;
}

Metrics aggregate(const std::vector<Confusion>& runs) {
  Metrics m;
  std::vector<double> acc, t1, t2;
  for (const auto& c : runs) {
    acc.push_back(c.accuracy());
    t1.push_back(c.type1());
    t2.push_back(c.type2());
  }
  m.accuracy = mean_std(acc);
  m.type1 = mean_std(t1);
  m.type2 = mean_std(t2);
  for (int r = 0; r < 2; ++r)
    for (int p = 0; p < 2; ++p) {
      std::vector<double> cell;
      for (const auto& c : runs) cell.push_back(c.counts[r][p]);
      m.confusion[r][p] = mean_std(cell);
    }
  m.evaluated = runs.empty() ? 0.0 : runs.front().total();
  return m;
}

}  // namespace

Metrics compute_metrics(const std::vector<Label>& predictions, const std::vector<Label>& labels) {
  if (predictions.size() != labels.size())
    throw InvalidArgumentError("compute_metrics: prediction/label length mismatch");
  if (predictions.empty()) throw InvalidArgumentError("compute_metrics: empty input");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int real = labels[i] == Label::good ? 0 : 1;
    int pred = predictions[i] == Label::good ? 0 : 1;
    c.counts[real][pred] += 1.0;
  }
  return aggregate({c});
}

CvOutcome cross_validate(const Matrix& x, const std::vector<Label>& y, const CvProtocol& proto,
                         const EbmConfig& cfg, std::vector<std::string> feature_names) {
  if (x.size() != y.size() || x.empty())
    throw InvalidArgumentError("cross_validate: bad dataset");
  if (proto.runs < 1) throw InvalidArgumentError("cross_validate: runs must be >= 1");
  if (proto.k < 2) throw InvalidArgumentError("cross_validate: k must be >= 2");
  if (proto.holdout_fraction < 0 || proto.holdout_fraction >= 1)
    throw InvalidArgumentError("cross_validate: holdout_fraction must lie in [0, 1)");

  const int n = static_cast<int>(x.size());
  std::vector<Confusion> cv_runs, holdout_runs;

  for (int run = 0; run < proto.runs; ++run) {
    const std::uint64_t run_seed = splitmix64(proto.seed ^ static_cast<std::uint64_t>(run + 1));
    std::vector<bool> held = stratified_holdout(y, proto.holdout_fraction, proto.k, run_seed);
    std::vector<int> pool;
    for (int i = 0; i < n; ++i)
      if (!held[static_cast<std::size_t>(i)]) pool.push_back(i);

    std::vector<Label> pool_labels;
    for (int i : pool) pool_labels.push_back(y[i]);
    std::vector<int> folds = stratified_kfold(pool_labels, proto.k, splitmix64(run_seed ^ 0xf01d));

    Confusion run_conf;
    for (int fold = 0; fold < proto.k; ++fold) {
      Matrix train_x;
      std::vector<Label> train_y;
      std::vector<int> test_idx;
      for (std::size_t j = 0; j < pool.size(); ++j) {
        if (folds[j] == fold)
          test_idx.push_back(pool[j]);
        else {
          train_x.push_back(x[static_cast<std::size_t>(pool[j])]);
          train_y.push_back(y[static_cast<std::size_t>(pool[j])]);
        }
      }
      EbmConfig fold_cfg = cfg;
      fold_cfg.seed = splitmix64(run_seed ^ (0xab1eULL + static_cast<std::uint64_t>(fold)));
      EbmModel model = train_ebm(train_x, train_y, fold_cfg, feature_names);
      for (int i : test_idx) {
        Label pred = predict_class(model, std::span<const double>(x[static_cast<std::size_t>(i)]));
        int r = y[static_cast<std::size_t>(i)] == Label::good ? 0 : 1;
        int p = pred == Label::good ? 0 : 1;
        run_conf.counts[r][p] += 1.0;
      }
    }
    cv_runs.push_back(run_conf);

    // Holdout metrics from a model trained on all non-holdout data.
    bool any_held = false;
    for (bool h : held) any_held |= h;
    if (any_held) {
      Matrix train_x;
      std::vector<Label> train_y;
      for (int i : pool) {
        train_x.push_back(x[static_cast<std::size_t>(i)]);
        train_y.push_back(y[static_cast<std::size_t>(i)]);
      }
      EbmConfig final_cfg = cfg;
      final_cfg.seed = splitmix64(run_seed ^ 0x601dULL);
      EbmModel model = train_ebm(train_x, train_y, final_cfg, feature_names);
      Confusion hc;
      for (int i = 0; i < n; ++i) {
        if (!held[static_cast<std::size_t>(i)]) continue;
        Label pred = predict_class(model, std::span<const double>(x[static_cast<std::size_t>(i)]));
        int r = y[static_cast<std::size_t>(i)] == Label::good ? 0 : 1;
        int p = pred == Label::good ? 0 : 1;
        hc.counts[r][p] += 1.0;
      }
      holdout_runs.push_back(hc);
    }
  }

  CvOutcome out;
  out.cv = aggregate(cv_runs);
  if (!holdout_runs.empty()) out.holdout = aggregate(holdout_runs);
  return out;
}

namespace {

std::string value_uncertainty(const MeanStd& ms, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f(%.*f)", decimals, ms.mean, decimals, ms.std);
  return buf;
}

}  // namespace

std::string format_metrics_report(const Metrics& m, std::string_view title) {
  std::ostringstream out;
  out << title << "\n";
  out << "  accuracy: " << value_uncertainty(m.accuracy, 1) << " %\n";
  out << "  type I:   " << value_uncertainty(m.type1, 1) << " %\n";
  out << "  type II:  " << value_uncertainty(m.type2, 1) << " %\n";
  out << "  confusion [real x pred, good/bad]:\n";
  out << "    good: " << value_uncertainty(m.confusion[0][0], 1) << "  "
      << value_uncertainty(m.confusion[0][1], 1) << "\n";
  out << "    bad:  " << value_uncertainty(m.confusion[1][0], 1) << "  "
      << value_uncertainty(m.confusion[1][1], 1) << "\n";
  out << "  evaluated per run: " << m.evaluated << "\n";
  return out.str();
}

std::string metrics_csv_row(const Metrics& m, std::string_view name) {
  std::ostringstream out;
  char buf[64];
  out << name;
  auto put = [&](const MeanStd& ms) {
    std::snprintf(buf, sizeof buf, ",%.4f,%.4f", ms.mean, ms.std);
    out << buf;
  };
  put(m.accuracy);
  put(m.type1);
  put(m.type2);
  for (int r = 0; r < 2; ++r)
    for (int p = 0; p < 2; ++p) {
      std::snprintf(buf, sizeof buf, ",%.4f", m.confusion[r][p].mean);
      out << buf;
    }
  return out.str();
}

Filterbank refine_filterbank(const std::vector<LabeledImage>& data, const Filterbank& initial,
                             const EbmConfig& cfg, double drop_threshold) {
  if (initial.kernels.empty()) throw InvalidArgumentError("refine_filterbank: empty bank");
  if (data.empty()) throw DataError("refine_filterbank: empty dataset");

  Filterbank bank = initial;
  while (true) {
    // Features are the response norms of the current bank.
    GaborVectorizer vec(bank, data.front().image.height, data.front().image.width);
    Matrix x;
    std::vector<Label> y;
    for (const auto& li : data) {
      FeatureVector fv = vec.vectorize(li.image);
      x.emplace_back(fv.values.begin(), fv.values.begin() + static_cast<long>(bank.names.size()));
      y.push_back(li.label);
    }
    EbmModel model = train_ebm(x, y, cfg, bank.names);
    auto importance = feature_importance(model, x);
    double max_imp = 0.0;
    for (const auto& e : importance)
      for (std::size_t i = 0; i < bank.names.size(); ++i)
        if (e.name == bank.names[i]) max_imp = std::max(max_imp, e.importance);

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < bank.names.size(); ++i) {
      double imp = 0.0;
      for (const auto& e : importance)
        if (e.name == bank.names[i]) imp = e.importance;
      if (!(imp < drop_threshold * max_imp)) keep.push_back(i);
    }
    if (keep.empty()) throw DataError("refine_filterbank: all filters dropped (degenerate data)");
    if (keep.size() == bank.names.size()) return bank;  // fixpoint
    Filterbank next;
    for (std::size_t i : keep) {
      next.kernels.push_back(bank.kernels[i]);
      next.names.push_back(bank.names[i]);
    }
    bank = std::move(next);
  }
}

}  // namespace tvec
