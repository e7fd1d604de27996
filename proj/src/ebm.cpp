#include "trianglevec/ebm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "trianglevec/errors.hpp"
#include "trianglevec/rng.hpp"

namespace tvec {

void EbmConfig::validate() const {
  if (n_bins < 1) throw InvalidArgumentError("n_bins must be >= 1");
  if (!(learning_rate > 0) || learning_rate > 1)
    throw InvalidArgumentError("learning_rate must lie in (0, 1]");
  if (max_rounds < 0) throw InvalidArgumentError("max_rounds must be >= 0");
  if (greedy_rounds < 0) throw InvalidArgumentError("greedy_rounds must be >= 0");
  if (smoothing_window < 0) throw InvalidArgumentError("smoothing_window must be >= 0");
  if (outer_bags < 1) throw InvalidArgumentError("outer_bags must be >= 1");
  if (early_stop_patience < 1) throw InvalidArgumentError("early_stop_patience must be >= 1");
  if (n_pairs < 0) throw InvalidArgumentError("n_pairs must be >= 0");
}

int bin_index(const std::vector<double>& edges, double x) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
}

std::vector<std::vector<double>> bin_features(const Matrix& x, int n_bins) {
  if (x.empty() || x[0].empty()) throw InvalidArgumentError("bin_features: empty matrix");
  const std::size_t n = x.size();
  const std::size_t f_count = x[0].size();
  std::vector<std::vector<double>> all_edges(f_count);
  std::vector<double> col(n);
  for (std::size_t f = 0; f < f_count; ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i].size() != f_count) throw InvalidArgumentError("bin_features: ragged matrix");
      if (!std::isfinite(x[i][f]))
        throw InvalidArgumentError("bin_features: non-finite value in feature " +
                                   std::to_string(f));
      col[i] = x[i][f];
    }
    std::sort(col.begin(), col.end());
    std::vector<double> distinct;
    for (double v : col)
      if (distinct.empty() || v > distinct.back()) distinct.push_back(v);

    std::vector<double>& edges = all_edges[f];
    if (distinct.size() <= 1) continue;  // single bin
    if (distinct.size() <= static_cast<std::size_t>(n_bins)) {
      for (std::size_t i = 1; i < distinct.size(); ++i)
        edges.push_back(0.5 * (distinct[i - 1] + distinct[i]));
      continue;
    }
    for (int q = 1; q < n_bins; ++q) {
      const double h = static_cast<double>(n - 1) * q / n_bins;
      const std::size_t lo = static_cast<std::size_t>(std::floor(h));
      const double frac = h - static_cast<double>(lo);
      double e = col[lo] + frac * (col[std::min(lo + 1, n - 1)] - col[lo]);
      if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
  }
  return all_edges;
}

namespace {

inline double sigmoid_prob(double score) { return 1.0 / (1.0 + std::exp(-score)); }

inline double leaf_value(double g, double h) { return h > 0.0 ? g / h : 0.0; }
inline double gain_value(double g, double h) { return h > 0.0 ? g * g / h : 0.0; }

struct TreeFit {
  // Per-bin additive update (already includes the learning rate).
  std::vector<double> delta;
};

/// <= 3-leaf regression tree over contiguous bin ranges fit to (G, H).
/// Split scan is left-to-right, strictly-greater comparisons; the second
/// split considers both child segments and prefers the left one on ties.
TreeFit fit_mini_tree(const std::vector<double>& g_bins, const std::vector<double>& h_bins,
                      double learning_rate) {
  const int b = static_cast<int>(g_bins.size());
  std::vector<double> pg(static_cast<std::size_t>(b) + 1, 0.0);
  std::vector<double> ph(static_cast<std::size_t>(b) + 1, 0.0);
  for (int i = 0; i < b; ++i) {
    pg[i + 1] = pg[i] + g_bins[i];
    ph[i + 1] = ph[i] + h_bins[i];
  }
  auto seg_g = [&](int lo, int hi) { return pg[hi] - pg[lo]; };  // [lo, hi)
  auto seg_h = [&](int lo, int hi) { return ph[hi] - ph[lo]; };
  auto best_split = [&](int lo, int hi, int& split, double& gain) {
    split = -1;
    gain = -std::numeric_limits<double>::infinity();
    const double parent = gain_value(seg_g(lo, hi), seg_h(lo, hi));
    for (int s = lo + 1; s < hi; ++s) {
      double cand = gain_value(seg_g(lo, s), seg_h(lo, s)) +
                    gain_value(seg_g(s, hi), seg_h(s, hi)) - parent;
      if (split < 0 || cand > gain) {
        split = s;
        gain = cand;
      }
    }
  };

  std::vector<int> cuts;  // segment boundaries between 0 and b
  if (b >= 2) {
    int s1;
    double g1;
    best_split(0, b, s1, g1);
    cuts.push_back(s1);
    int sl, sr;
    double gl, gr;
    best_split(0, s1, sl, gl);
    best_split(s1, b, sr, gr);
    if (sl >= 0 && (sr < 0 || gl >= gr))
      cuts.push_back(sl);
    else if (sr >= 0)
      cuts.push_back(sr);
    std::sort(cuts.begin(), cuts.end());
  }

  TreeFit fit;
  fit.delta.assign(static_cast<std::size_t>(b), 0.0);
  int lo = 0;
  for (std::size_t c = 0; c <= cuts.size(); ++c) {
    int hi = c < cuts.size() ? cuts[c] : b;
    const double v = learning_rate * leaf_value(seg_g(lo, hi), seg_h(lo, hi));
    for (int i = lo; i < hi; ++i) fit.delta[i] = v;
    lo = hi;
  }
  return fit;
}

struct BagData {
  std::vector<int> pool;       // unique training sample indices
  std::vector<double> weight;  // bootstrap multiplicity per pool entry
  std::vector<int> val;        // validation sample indices
  double alpha = 0.0;
};

double weighted_logloss(const std::vector<double>& scores, const std::vector<int>& idx,
                        const std::vector<double>* weights, const std::vector<int>& y01) {
  double loss = 0.0, wsum = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const int i = idx[j];
    const double w = weights ? (*weights)[j] : 1.0;
    double p = std::clamp(sigmoid_prob(scores[i]), 1e-12, 1.0 - 1e-12);
    loss -= w * (y01[i] ? std::log(p) : std::log(1.0 - p));
    wsum += w;
  }
  return wsum > 0 ? loss / wsum : 0.0;
}

}  // namespace

EbmModel train_ebm(const Matrix& x, const std::vector<Label>& y, const EbmConfig& cfg,
                   std::vector<std::string> feature_names) {
  cfg.validate();
  if (x.empty()) throw DataError("train_ebm: no samples");
  if (x.size() != y.size()) throw DataError("train_ebm: feature/label count mismatch");
  const int n = static_cast<int>(x.size());
  const int f_count = static_cast<int>(x[0].size());
  if (f_count == 0) throw DataError("train_ebm: no features");

  std::vector<int> y01(static_cast<std::size_t>(n));
  int n_good = 0;
  for (int i = 0; i < n; ++i) {
    y01[i] = y[i] == Label::good ? 1 : 0;
    n_good += y01[i];
  }
  if (n_good == 0 || n_good == n)
    throw DataError("train_ebm: training data contains a single class");
  if (n_good < 2 || n - n_good < 2)
    throw DataError("train_ebm: need at least 2 samples per class");

  if (feature_names.empty())
    for (int f = 0; f < f_count; ++f) feature_names.push_back("f" + std::to_string(f));
  if (static_cast<int>(feature_names.size()) != f_count)
    throw InvalidArgumentError("train_ebm: feature name count mismatch");

  const auto edges = bin_features(x, cfg.n_bins);
  std::vector<int> bins_n(static_cast<std::size_t>(f_count));
  std::vector<std::vector<int>> binned(static_cast<std::size_t>(f_count),
                                       std::vector<int>(static_cast<std::size_t>(n)));
  for (int f = 0; f < f_count; ++f) {
    bins_n[f] = static_cast<int>(edges[f].size()) + 1;
    for (int i = 0; i < n; ++i) binned[f][i] = bin_index(edges[f], x[i][f]);
  }

  // Bag training.
  const int bags = cfg.outer_bags;
  std::vector<std::vector<std::vector<double>>> bag_terms(
      static_cast<std::size_t>(bags));
  std::vector<double> bag_alpha(static_cast<std::size_t>(bags), 0.0);

  for (int b = 0; b < bags; ++b) {
    Rng rng(splitmix64(cfg.seed ^ (0x9e55u + static_cast<std::uint64_t>(b))));
    BagData bag;
    if (bags == 1) {
      bag.pool.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) bag.pool[i] = i;
      bag.weight.assign(static_cast<std::size_t>(n), 1.0);
    } else {
      // Stratified 15% validation split, then a stratified bootstrap of the
      // remaining pool.
      for (int cls = 0; cls < 2; ++cls) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
          if (y01[i] == cls) idx.push_back(i);
        rng.shuffle(idx);
        int n_val = std::max(1, static_cast<int>(std::floor(0.15 * idx.size() + 0.5)));
        n_val = std::min(n_val, static_cast<int>(idx.size()) - 1);
        for (int j = 0; j < n_val; ++j) bag.val.push_back(idx[j]);
        std::vector<int> pool(idx.begin() + n_val, idx.end());
        std::vector<double> w(pool.size(), 0.0);
        for (std::size_t d = 0; d < pool.size(); ++d)
          w[rng.below(pool.size())] += 1.0;
        for (std::size_t j = 0; j < pool.size(); ++j) {
          bag.pool.push_back(pool[j]);
          bag.weight.push_back(w[j]);
        }
      }
    }
    double wpos = 0.0, wneg = 0.0;
    for (std::size_t j = 0; j < bag.pool.size(); ++j)
      (y01[bag.pool[j]] ? wpos : wneg) += bag.weight[j];
    if (wpos <= 0 || wneg <= 0) {
      // Degenerate bootstrap; fall back to the pool class balance.
      wpos = wneg = 0.0;
      for (int i : bag.pool) (y01[i] ? wpos : wneg) += 1.0;
    }
    bag.alpha = std::log(wpos / wneg);

    std::vector<std::vector<double>> terms(static_cast<std::size_t>(f_count));
    for (int f = 0; f < f_count; ++f)
      terms[f].assign(static_cast<std::size_t>(bins_n[f]), 0.0);
    std::vector<double> scores(static_cast<std::size_t>(n), bag.alpha);

    std::vector<double> g_bins, h_bins;
    auto compute_tree = [&](int f) {
      g_bins.assign(static_cast<std::size_t>(bins_n[f]), 0.0);
      h_bins.assign(static_cast<std::size_t>(bins_n[f]), 0.0);
      const auto& fb = binned[f];
      for (std::size_t j = 0; j < bag.pool.size(); ++j) {
        const int i = bag.pool[j];
        const double w = bag.weight[j];
        if (w == 0.0) continue;
        const double p = sigmoid_prob(scores[i]);
        g_bins[fb[i]] += w * (y01[i] - p);
        h_bins[fb[i]] += w * p * (1.0 - p);
      }
      return fit_mini_tree(g_bins, h_bins, cfg.learning_rate);
    };
    auto apply = [&](int f, const TreeFit& fit) {
      const auto& fb = binned[f];
      for (int bin = 0; bin < bins_n[f]; ++bin) terms[f][bin] += fit.delta[bin];
      for (int i : bag.pool) scores[i] += fit.delta[fb[i]];
      for (int i : bag.val) scores[i] += fit.delta[fb[i]];
    };

    const bool has_val = !bag.val.empty();
    double best_val = std::numeric_limits<double>::infinity();
    int patience = 0;
    std::vector<std::vector<double>> best_terms = terms;

    for (int round = 1; round <= cfg.max_rounds; ++round) {
      for (int f = 0; f < f_count; ++f) apply(f, compute_tree(f));
      for (int g = 0; g < cfg.greedy_rounds; ++g) {
        // Pick the feature whose one-step update most reduces training loss.
        int best_f = -1;
        double best_loss = std::numeric_limits<double>::infinity();
        TreeFit best_fit;
        for (int f = 0; f < f_count; ++f) {
          TreeFit fit = compute_tree(f);
          double loss = 0.0, wsum = 0.0;
          const auto& fb = binned[f];
          for (std::size_t j = 0; j < bag.pool.size(); ++j) {
            const int i = bag.pool[j];
            const double w = bag.weight[j];
            if (w == 0.0) continue;
            double p = std::clamp(sigmoid_prob(scores[i] + fit.delta[fb[i]]), 1e-12,
                                  1.0 - 1e-12);
            loss -= w * (y01[i] ? std::log(p) : std::log(1.0 - p));
            wsum += w;
          }
          loss = wsum > 0 ? loss / wsum : 0.0;
          if (best_f < 0 || loss < best_loss) {
            best_f = f;
            best_loss = loss;
            best_fit = std::move(fit);
          }
        }
        if (best_f >= 0) apply(best_f, best_fit);
      }
      if (has_val) {
        double vl = weighted_logloss(scores, bag.val, nullptr, y01);
        if (vl < best_val - 1e-12) {
          best_val = vl;
          best_terms = terms;
          patience = 0;
        } else if (++patience >= cfg.early_stop_patience) {
          break;
        }
      }
    }
    bag_terms[b] = has_val ? best_terms : terms;
    bag_alpha[b] = bag.alpha;
  }

  // Bin-wise mean merge.
  EbmModel model;
  model.config = cfg;
  model.feature_names = feature_names;
  model.intercept = 0.0;
  for (int b = 0; b < bags; ++b) model.intercept += bag_alpha[b];
  model.intercept /= bags;
  model.terms.resize(static_cast<std::size_t>(f_count));
  for (int f = 0; f < f_count; ++f) {
    EbmTerm& t = model.terms[f];
    t.name = feature_names[f];
    t.edges = edges[f];
    t.scores.assign(static_cast<std::size_t>(bins_n[f]), 0.0);
    for (int b = 0; b < bags; ++b)
      for (int bin = 0; bin < bins_n[f]; ++bin) t.scores[bin] += bag_terms[b][f][bin];
    for (double& s : t.scores) s /= bags;
    t.hist_good.assign(static_cast<std::size_t>(bins_n[f]), 0.0);
    t.hist_bad.assign(static_cast<std::size_t>(bins_n[f]), 0.0);
    double mn = x[0][f], mx = x[0][f];
    for (int i = 0; i < n; ++i) {
      (y01[i] ? t.hist_good : t.hist_bad)[binned[f][i]] += 1.0;
      mn = std::min(mn, x[i][f]);
      mx = std::max(mx, x[i][f]);
    }
    t.data_min = mn;
    t.data_max = mx;
  }

  // Pairwise terms on the merged model's residuals, screened by residual
  // variance reduction on a coarse grid.
  if (cfg.n_pairs > 0 && f_count >= 2) {
    std::vector<double> scores(static_cast<std::size_t>(n), model.intercept);
    for (int f = 0; f < f_count; ++f)
      for (int i = 0; i < n; ++i) scores[i] += model.terms[f].scores[binned[f][i]];

    struct Coarse {
      int groups = 1;
      std::vector<int> group_of_bin;
      std::vector<double> edges;
    };
    std::vector<Coarse> coarse(static_cast<std::size_t>(f_count));
    for (int f = 0; f < f_count; ++f) {
      Coarse& c = coarse[f];
      c.groups = std::min(16, bins_n[f]);
      c.group_of_bin.resize(static_cast<std::size_t>(bins_n[f]));
      for (int bin = 0; bin < bins_n[f]; ++bin)
        c.group_of_bin[bin] = static_cast<int>(
            static_cast<long long>(bin) * c.groups / bins_n[f]);
      for (int bin = 1; bin < bins_n[f]; ++bin)
        if (c.group_of_bin[bin] != c.group_of_bin[bin - 1])
          c.edges.push_back(edges[f][bin - 1]);
    }

    std::vector<double> resid(static_cast<std::size_t>(n));
    double rsum = 0.0;
    for (int i = 0; i < n; ++i) {
      resid[i] = y01[i] - sigmoid_prob(scores[i]);
      rsum += resid[i];
    }
    struct PairScore {
      int a, b;
      double vr;
    };
    std::vector<PairScore> ranked;
    for (int a = 0; a < f_count; ++a)
      for (int b2 = a + 1; b2 < f_count; ++b2) {
        const Coarse& ca = coarse[a];
        const Coarse& cb = coarse[b2];
        std::vector<double> cell_sum(static_cast<std::size_t>(ca.groups) * cb.groups, 0.0);
        std::vector<double> cell_n(static_cast<std::size_t>(ca.groups) * cb.groups, 0.0);
        for (int i = 0; i < n; ++i) {
          int cell = ca.group_of_bin[binned[a][i]] * cb.groups + cb.group_of_bin[binned[b2][i]];
          cell_sum[cell] += resid[i];
          cell_n[cell] += 1.0;
        }
        double vr = -rsum * rsum / n;
        for (std::size_t c = 0; c < cell_sum.size(); ++c)
          if (cell_n[c] > 0) vr += cell_sum[c] * cell_sum[c] / cell_n[c];
        ranked.push_back({a, b2, vr});
      }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const PairScore& l, const PairScore& r) { return l.vr > r.vr; });
    const int take = std::min<int>(cfg.n_pairs, static_cast<int>(ranked.size()));
    for (int p = 0; p < take; ++p) {
      const Coarse& ca = coarse[ranked[p].a];
      const Coarse& cb = coarse[ranked[p].b];
      EbmPairTerm pt;
      pt.feature_a = ranked[p].a;
      pt.feature_b = ranked[p].b;
      pt.edges_a = ca.edges;
      pt.edges_b = cb.edges;
      pt.rows = ca.groups;
      pt.cols = cb.groups;
      std::vector<double> gc(static_cast<std::size_t>(ca.groups) * cb.groups, 0.0);
      std::vector<double> hc(static_cast<std::size_t>(ca.groups) * cb.groups, 0.0);
      std::vector<double> nc(static_cast<std::size_t>(ca.groups) * cb.groups, 0.0);
      std::vector<int> cell_of(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const double prob = sigmoid_prob(scores[i]);
        int cell = ca.group_of_bin[binned[ranked[p].a][i]] * cb.groups +
                   cb.group_of_bin[binned[ranked[p].b][i]];
        cell_of[i] = cell;
        gc[cell] += y01[i] - prob;
        hc[cell] += prob * (1.0 - prob);
        nc[cell] += 1.0;
      }
      pt.scores.assign(gc.size(), 0.0);
      // Damped single Newton step per cell; +1 in the denominator keeps
      // singleton cells bounded.
      for (std::size_t c = 0; c < gc.size(); ++c) pt.scores[c] = gc[c] / (hc[c] + 1.0);
      double mu = 0.0;
      for (std::size_t c = 0; c < gc.size(); ++c) mu += nc[c] * pt.scores[c];
      mu /= n;
      for (double& s : pt.scores) s -= mu;
      model.intercept += mu;
      for (int i = 0; i < n; ++i) scores[i] += pt.scores[cell_of[i]];
      model.pair_terms.push_back(std::move(pt));
    }
  }

  // Post-hoc smoothing of the 1-D curves.
  if (cfg.smoothing_window > 1) {
    const int half = cfg.smoothing_window / 2;
    for (auto& t : model.terms) {
      const int b = static_cast<int>(t.scores.size());
      std::vector<double> smoothed(t.scores.size());
      for (int i = 0; i < b; ++i) {
        int lo = std::max(0, i - half), hi = std::min(b - 1, i + half);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += t.scores[j];
        smoothed[i] = acc / (hi - lo + 1);
      }
      t.scores = std::move(smoothed);
    }
  }

  // Re-center every term over the training distribution; the intercept
  // absorbs the shifts.
  for (auto& t : model.terms) {
    double mu = 0.0;
    for (std::size_t bin = 0; bin < t.scores.size(); ++bin)
      mu += (t.hist_good[bin] + t.hist_bad[bin]) * t.scores[bin];
    mu /= n;
    for (double& s : t.scores) s -= mu;
    model.intercept += mu;
  }
  return model;
}

double predict_score(const EbmModel& model, std::span<const double> values) {
  if (values.size() != model.terms.size())
    throw InvalidArgumentError("predict_score: expected " + std::to_string(model.terms.size()) +
                               " features, got " + std::to_string(values.size()));
  double s = model.intercept;
  for (std::size_t f = 0; f < model.terms.size(); ++f)
    s += model.terms[f].scores[static_cast<std::size_t>(bin_index(model.terms[f].edges, values[f]))];
  for (const auto& pt : model.pair_terms) {
    int ga = bin_index(pt.edges_a, values[static_cast<std::size_t>(pt.feature_a)]);
    int gb = bin_index(pt.edges_b, values[static_cast<std::size_t>(pt.feature_b)]);
    s += pt.at(ga, gb);
  }
  return s;
}

namespace {

std::vector<double> align_features(const EbmModel& model, const FeatureVector& fv) {
  std::vector<double> values(model.feature_names.size());
  for (std::size_t f = 0; f < model.feature_names.size(); ++f) {
    int idx = fv.index_of(model.feature_names[f]);
    if (idx < 0)
      throw InvalidArgumentError("missing feature '" + model.feature_names[f] + "'");
    values[f] = fv.values[static_cast<std::size_t>(idx)];
  }
  return values;
}

}  // namespace

double predict_score(const EbmModel& model, const FeatureVector& fv) {
  return predict_score(model, std::span<const double>(align_features(model, fv)));
}

Label predict_class(const EbmModel& model, std::span<const double> values, double threshold) {
  return predict_score(model, values) > threshold ? Label::good : Label::bad;
}

Label predict_class(const EbmModel& model, const FeatureVector& fv, double threshold) {
  return predict_score(model, fv) > threshold ? Label::good : Label::bad;
}

std::vector<ImportanceEntry> feature_importance(const EbmModel& model, const Matrix& x) {
  std::vector<ImportanceEntry> out;
  const std::size_t n = x.size();
  if (n == 0) throw InvalidArgumentError("feature_importance: empty reference matrix");
  for (std::size_t f = 0; f < model.terms.size(); ++f) {
    double acc = 0.0;
    for (const auto& row : x)
      acc += std::abs(
          model.terms[f].scores[static_cast<std::size_t>(bin_index(model.terms[f].edges, row[f]))]);
    out.push_back({model.terms[f].name, acc / static_cast<double>(n)});
  }
  for (const auto& pt : model.pair_terms) {
    double acc = 0.0;
    for (const auto& row : x) {
      int ga = bin_index(pt.edges_a, row[static_cast<std::size_t>(pt.feature_a)]);
      int gb = bin_index(pt.edges_b, row[static_cast<std::size_t>(pt.feature_b)]);
      acc += std::abs(pt.at(ga, gb));
    }
    out.push_back({model.feature_names[static_cast<std::size_t>(pt.feature_a)] + " x " +
                       model.feature_names[static_cast<std::size_t>(pt.feature_b)],
                   acc / static_cast<double>(n)});
  }
  std::stable_sort(out.begin(), out.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    return a.importance > b.importance;
  });
  return out;
}

std::vector<CurvePoint> feature_curve(const EbmModel& model, std::string_view term_name) {
  const EbmTerm* term = nullptr;
  for (const auto& t : model.terms)
    if (t.name == term_name) term = &t;
  if (!term) throw InvalidArgumentError("unknown term '" + std::string(term_name) + "'");
  std::vector<CurvePoint> out;
  const std::size_t b = term->scores.size();
  for (std::size_t i = 0; i < b; ++i) {
    CurvePoint p;
    const double lo = i == 0 ? term->data_min : term->edges[i - 1];
    const double hi = i == b - 1 ? term->data_max : term->edges[i];
    p.value = 0.5 * (lo + hi);
    p.score = term->scores[i];
    p.hist_good = term->hist_good[i];
    p.hist_bad = term->hist_bad[i];
    out.push_back(p);
  }
  return out;
}

Explanation explain_local(const EbmModel& model, const FeatureVector& fv) {
  const std::vector<double> values = align_features(model, fv);
  Explanation ex;
  ex.intercept = model.intercept;
  double total = model.intercept;
  for (std::size_t f = 0; f < model.terms.size(); ++f) {
    double c = model.terms[f]
                   .scores[static_cast<std::size_t>(bin_index(model.terms[f].edges, values[f]))];
    ex.per_term.emplace_back(model.terms[f].name, c);
    total += c;
  }
  for (const auto& pt : model.pair_terms) {
    int ga = bin_index(pt.edges_a, values[static_cast<std::size_t>(pt.feature_a)]);
    int gb = bin_index(pt.edges_b, values[static_cast<std::size_t>(pt.feature_b)]);
    double c = pt.at(ga, gb);
    ex.per_term.emplace_back(model.feature_names[static_cast<std::size_t>(pt.feature_a)] + " x " +
                                 model.feature_names[static_cast<std::size_t>(pt.feature_b)],
                             c);
    total += c;
  }
  std::stable_sort(ex.per_term.begin(), ex.per_term.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
  ex.total = total;
  ex.predicted = total > 0 ? Label::good : Label::bad;
  return ex;
}

namespace {

void write_vec(std::ostream& out, const char* tag, const std::vector<double>& v) {
  out << tag << ' ' << v.size();
  for (double d : v) out << ' ' << format_double(d);
  out << '\n';
}

std::vector<double> read_vec(std::istream& in, const std::string& expect) {
  std::string tag;
  std::size_t k;
  if (!(in >> tag >> k) || tag != expect)
    throw ParseError("model file: expected '" + expect + "' block");
  std::vector<double> v(k);
  for (auto& d : v)
    if (!(in >> d)) throw ParseError("model file: truncated '" + expect + "' block");
  return v;
}

}  // namespace

void save_ebm(const EbmModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "trianglevec-ebm v1\n";
  out << "intercept " << format_double(model.intercept) << '\n';
  const EbmConfig& c = model.config;
  out << "config " << c.n_bins << ' ' << format_double(c.learning_rate) << ' ' << c.max_rounds
      << ' ' << c.greedy_rounds << ' ' << c.smoothing_window << ' ' << c.outer_bags << ' '
      << c.early_stop_patience << ' ' << c.n_pairs << ' ' << c.seed << '\n';
  out << "features " << model.terms.size() << '\n';
  for (const auto& t : model.terms) {
    out << "feature " << t.name << ' ' << format_double(t.data_min) << ' '
        << format_double(t.data_max) << '\n';
    write_vec(out, "edges", t.edges);
    write_vec(out, "scores", t.scores);
    write_vec(out, "hist_good", t.hist_good);
    write_vec(out, "hist_bad", t.hist_bad);
  }
  out << "pairs " << model.pair_terms.size() << '\n';
  for (const auto& p : model.pair_terms) {
    out << "pair " << p.feature_a << ' ' << p.feature_b << ' ' << p.rows << ' ' << p.cols << '\n';
    write_vec(out, "edges_a", p.edges_a);
    write_vec(out, "edges_b", p.edges_b);
    write_vec(out, "grid", p.scores);
  }
}

EbmModel load_ebm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != "trianglevec-ebm v1") throw ParseError("unrecognized model header");
  EbmModel model;
  std::string tag;
  if (!(in >> tag >> model.intercept) || tag != "intercept")
    throw ParseError("model file: missing intercept");
  EbmConfig& c = model.config;
  if (!(in >> tag >> c.n_bins >> c.learning_rate >> c.max_rounds >> c.greedy_rounds >>
        c.smoothing_window >> c.outer_bags >> c.early_stop_patience >> c.n_pairs >> c.seed) ||
      tag != "config")
    throw ParseError("model file: missing config");
  std::size_t f_count;
  if (!(in >> tag >> f_count) || tag != "features")
    throw ParseError("model file: missing features count");
  for (std::size_t f = 0; f < f_count; ++f) {
    EbmTerm t;
    if (!(in >> tag >> t.name >> t.data_min >> t.data_max) || tag != "feature")
      throw ParseError("model file: bad feature block");
    t.edges = read_vec(in, "edges");
    t.scores = read_vec(in, "scores");
    t.hist_good = read_vec(in, "hist_good");
    t.hist_bad = read_vec(in, "hist_bad");
    model.feature_names.push_back(t.name);
    model.terms.push_back(std::move(t));
  }
  std::size_t p_count;
  if (!(in >> tag >> p_count) || tag != "pairs")
    throw ParseError("model file: missing pairs count");
  for (std::size_t p = 0; p < p_count; ++p) {
    EbmPairTerm pt;
    if (!(in >> tag >> pt.feature_a >> pt.feature_b >> pt.rows >> pt.cols) || tag != "pair")
      throw ParseError("model file: bad pair block");
    pt.edges_a = read_vec(in, "edges_a");
    pt.edges_b = read_vec(in, "edges_b");
    pt.scores = read_vec(in, "grid");
    model.pair_terms.push_back(std::move(pt));
  }
  return model;
}

}  // namespace tvec
