// trianglevec: vectorize quantum-dot triangle plots, train a glass-box
// classifier, and emit explanations.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "trianglevec/ebm.hpp"
#include "trianglevec/errors.hpp"
#include "trianglevec/features.hpp"
#include "trianglevec/fitvec.hpp"
#include "trianglevec/gabor.hpp"
#include "trianglevec/harness.hpp"
#include "trianglevec/image.hpp"
#include "trianglevec/report.hpp"
#include "trianglevec/rng.hpp"
#include "trianglevec/synthtri.hpp"

namespace fs = std::filesystem;
using namespace tvec;

namespace {

constexpr int kExitInputError = 2;
constexpr int kExitComputeError = 3;

Image load_and_prepare(const fs::path& path) {
  ImageFormat fmt = path.extension() == ".pgm" ? ImageFormat::pgm16 : ImageFormat::csv_grid;
  Image img = load_image(path, fmt);
  if (img.height != 64 || img.width != 64) img = resize_bicubic(img, 64, 64);
  return normalize_minmax(img);
}

struct EbmFlags {
  EbmConfig cfg;
  void attach(CLI::App* cmd) {
    cmd->add_option("--bins", cfg.n_bins, "quantile bins per feature");
    cmd->add_option("--learning-rate", cfg.learning_rate, "boosting learning rate");
    cmd->add_option("--max-rounds", cfg.max_rounds, "maximum boosting sweeps");
    cmd->add_option("--greedy-rounds", cfg.greedy_rounds, "greedy updates per sweep");
    cmd->add_option("--smoothing", cfg.smoothing_window, "term smoothing window");
    cmd->add_option("--bags", cfg.outer_bags, "outer bagging rounds");
    cmd->add_option("--patience", cfg.early_stop_patience, "early stopping patience");
    cmd->add_option("--pairs", cfg.n_pairs, "number of pairwise terms");
  }
};

struct FitFlags {
  double lambda = 0.5;
  int de_generations = 300;
  int de_popfactor = 15;
  void attach(CLI::App* cmd) {
    cmd->add_option("--lambda", lambda, "similarity blend weight")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--de-generations", de_generations, "DE generation budget");
    cmd->add_option("--de-popfactor", de_popfactor, "DE population factor");
  }
  FitConfig config(std::uint64_t seed) const {
    FitConfig cfg;
    cfg.blend_weight = lambda;
    cfg.de.max_generations = de_generations;
    cfg.de.population_factor = de_popfactor;
    cfg.de.seed = seed;
    return cfg;
  }
};

struct VecRow {
  bool ok = false;
  std::string id;
  std::vector<double> features;
  Label label = Label::bad;
  long evals = 0;
  std::string error;
};

/// Vectorizes all manifest entries with a bounded worker pool. Output is
/// ordered by manifest index, so results do not depend on the job count.
std::vector<VecRow> vectorize_manifest(const std::vector<ManifestEntry>& entries,
                                       const std::string& method, const FitFlags& fit,
                                       std::uint64_t seed, int jobs,
                                       const fs::path& overlay_dir = {}) {
  const Filterbank bank = make_default_filterbank();
  const GaborVectorizer gv(bank);
  std::vector<VecRow> rows(entries.size());
  std::atomic<std::size_t> cursor{0};
  std::mutex log_mutex;
  std::atomic<std::size_t> done{0};

  auto worker = [&]() {
    for (std::size_t i; (i = cursor.fetch_add(1)) < entries.size();) {
      VecRow& row = rows[i];
      row.id = entries[i].id;
      row.label = entries[i].label;
      try {
        Image img = load_and_prepare(entries[i].path);
        if (method == "gabor") {
          FeatureVector fv = gv.vectorize(img);
          row.features = fv.values;
        } else {
          FitConfig cfg = fit.config(splitmix64(seed ^ static_cast<std::uint64_t>(i)));
          FitResult fr = fit_synthetic(img, cfg);
          FeatureVector fv = vectorize_synth(fr);
          if (method == "hybrid") fv = hybrid_vector(fv, img, bank);
          row.features = fv.values;
          row.evals = fr.evals;
          if (!overlay_dir.empty())
            write_fit_overlay_svg(img, fr, overlay_dir / (row.id + "_fit.svg"));
        }
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      std::size_t d = done.fetch_add(1) + 1;
      std::lock_guard<std::mutex> lock(log_mutex);
      std::fprintf(stderr, "[%zu/%zu] %s %s\n", d, entries.size(), row.id.c_str(),
                   row.ok ? "ok" : row.error.c_str());
    }
  };

  int n_threads = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::vector<std::string> method_feature_names(const std::string& method) {
  if (method == "gabor") {
    Filterbank bank = make_default_filterbank();
    std::vector<std::string> names = bank.names;
    names.insert(names.end(), {"wall_x", "wall_y", "wall_strength_x", "wall_strength_y"});
    return names;
  }
  std::vector<std::string> names = synth_feature_names();
  if (method == "hybrid") names.push_back(kHybridGaborFeature);
  return names;
}

struct ProtocolFlags {
  CvProtocol proto;
  void attach(CLI::App* cmd) {
    cmd->add_option("--runs", proto.runs, "cross-validation repetitions");
    cmd->add_option("--k", proto.k, "number of folds");
    cmd->add_option("--holdout", proto.holdout_fraction, "stratified holdout fraction")
        ->check(CLI::Range(0.0, 0.99));
  }
};

void run_train_eval(const fs::path& features_path, const CvProtocol& proto, EbmConfig cfg,
                    std::uint64_t seed, const fs::path& model_out, const fs::path& report_out,
                    const fs::path& metrics_csv, int k_lo, int k_hi) {
  FeatureTable table = read_feature_csv(features_path);
  if (!table.has_labels) throw ParseError("feature CSV has no label column");
  cfg.seed = seed;

  std::ostringstream report;
  if (k_lo > 0) {
    report << "k-fold sweep\n";
    for (int k = std::max(2, k_lo); k <= k_hi; ++k) {
      CvProtocol p = proto;
      p.k = k;
      p.seed = seed;
      CvOutcome o = cross_validate(table.rows, table.labels, p, cfg, table.feature_names);
      char line[96];
      std::snprintf(line, sizeof line, "  k=%d accuracy %.1f(%.1f) %%\n", k, o.cv.accuracy.mean,
                    o.cv.accuracy.std);
      report << line;
    }
  } else {
    CvProtocol p = proto;
    p.seed = seed;
    CvOutcome o = cross_validate(table.rows, table.labels, p, cfg, table.feature_names);
    report << format_metrics_report(o.cv, "cross-validation (mean over runs)");
    if (proto.holdout_fraction > 0)
      report << format_metrics_report(o.holdout, "holdout (mean over runs)");
    if (!metrics_csv.empty()) {
      std::ofstream mc(metrics_csv);
      mc << kMetricsCsvHeader << '\n'
         << metrics_csv_row(o.cv, "cv") << '\n'
         << metrics_csv_row(o.holdout, "holdout") << '\n';
    }
  }
  std::cout << report.str();
  if (!report_out.empty()) {
    std::ofstream out(report_out);
    out << report.str();
  }

  if (!model_out.empty()) {
    // Final model: all non-holdout data under the first run's split.
    std::vector<bool> held = stratified_holdout(table.labels, proto.holdout_fraction, proto.k,
                                                splitmix64(seed ^ 1ULL));
    Matrix train_x;
    std::vector<Label> train_y;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (held[i]) continue;
      train_x.push_back(table.rows[i]);
      train_y.push_back(table.labels[i]);
    }
    EbmConfig final_cfg = cfg;
    final_cfg.seed = splitmix64(seed ^ 0x0f17aULL);
    EbmModel model = train_ebm(train_x, train_y, final_cfg, table.feature_names);
    save_ebm(model, model_out);
    std::cout << "model written to " << model_out.string() << "\n";
  }
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"triangle-plot vectorization, classification and explanation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file (flags take precedence)");

  // --- generate ---
  auto* gen = app.add_subcommand("generate", "generate a labeled synthetic corpus");
  fs::path gen_out;
  CorpusSpec spec;
  spec.n = 100;
  std::vector<std::string> mode_names;
  std::uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--n", spec.n, "number of images");
  gen->add_option("--good-fraction", spec.good_fraction, "fraction of good images");
  gen->add_option("--noise-sigma", spec.noise_sigma, "additive Gaussian noise level");
  gen->add_option("--ridge-amplitude", spec.ridge_amplitude, "ridge texture amplitude");
  gen->add_option("--ridge-period", spec.ridge_period, "ridge texture period (pixels)");
  gen->add_option("--modes", mode_names,
                  "ambiguous bad modes: dropout, vertical-fringe, oversized-triangle");
  gen->add_option("--seed", gen_seed, "master seed");

  // --- vectorize ---
  auto* vec = app.add_subcommand("vectorize", "vectorize a dataset manifest into features");
  fs::path vec_manifest, vec_out, vec_fit_csv;
  std::string vec_method = "gabor";
  std::uint64_t vec_seed = 0;
  int vec_jobs = static_cast<int>(std::thread::hardware_concurrency());
  FitFlags vec_fit;
  vec->add_option("--manifest", vec_manifest, "dataset manifest (id<TAB>path<TAB>label)")
      ->required();
  vec->add_option("--out", vec_out, "output feature CSV")->required();
  vec->add_option("--method", vec_method, "vectorizer")
      ->check(CLI::IsMember({"gabor", "synth", "hybrid"}));
  vec->add_option("--fit-csv", vec_fit_csv, "also write fit results (id, features, evals)");
  vec->add_option("--seed", vec_seed, "master seed");
  vec->add_option("--jobs", vec_jobs, "parallel workers");
  vec_fit.attach(vec);

  // --- train ---
  auto* train = app.add_subcommand("train", "cross-validate and train a final model");
  fs::path train_features, train_model = "model.ebm", train_report, train_metrics;
  std::uint64_t train_seed = 0;
  ProtocolFlags train_proto;
  EbmFlags train_ebm_flags;
  train->add_option("--features", train_features, "feature CSV with labels")->required();
  train->add_option("--model-out", train_model, "output model file");
  train->add_option("--report-out", train_report, "metrics report file");
  train->add_option("--metrics-csv", train_metrics, "metrics CSV file");
  train->add_option("--seed", train_seed, "master seed");
  train_proto.attach(train);
  train_ebm_flags.attach(train);

  // --- evaluate ---
  auto* eval = app.add_subcommand("evaluate", "evaluate features (CV) or a stored model");
  fs::path eval_features, eval_model_in, eval_model_out, eval_report, eval_metrics;
  std::uint64_t eval_seed = 0;
  std::vector<int> eval_k_sweep;
  ProtocolFlags eval_proto;
  EbmFlags eval_ebm_flags;
  eval->add_option("--features", eval_features, "feature CSV with labels")->required();
  eval->add_option("--model-in", eval_model_in, "score an existing model instead of CV");
  eval->add_option("--model-out", eval_model_out, "optionally write a final model");
  eval->add_option("--report-out", eval_report, "metrics report file");
  eval->add_option("--metrics-csv", eval_metrics, "metrics CSV file");
  eval->add_option("--seed", eval_seed, "master seed");
  eval->add_option("--k-sweep", eval_k_sweep, "sweep k over an inclusive range: LO HI")
      ->expected(2);
  eval_proto.attach(eval);
  eval_ebm_flags.attach(eval);

  // --- explain ---
  auto* explain = app.add_subcommand("explain", "emit global and per-image explanations");
  fs::path ex_model, ex_features, ex_image, ex_out = ".";
  std::vector<std::string> ex_ids;
  bool ex_all_local = false;
  std::string ex_method = "hybrid";
  std::uint64_t ex_seed = 0;
  FitFlags ex_fit;
  explain->add_option("--model", ex_model, "trained model file")->required();
  explain->add_option("--features", ex_features, "feature CSV for global + local explanations");
  explain->add_option("--image", ex_image, "single image (csv-grid or pgm16) to explain");
  explain->add_option("--out", ex_out, "output directory");
  explain->add_option("--id", ex_ids, "row ids to explain locally");
  explain->add_flag("--all-local", ex_all_local, "local explanation for every row");
  explain->add_option("--method", ex_method, "vectorizer for --image")
      ->check(CLI::IsMember({"gabor", "synth", "hybrid"}));
  explain->add_option("--seed", ex_seed, "seed for --image fits");
  ex_fit.attach(explain);

  // --- plot ---
  auto* plot = app.add_subcommand("plot", "fit images and emit overlay SVGs");
  fs::path plot_manifest, plot_out;
  std::uint64_t plot_seed = 0;
  int plot_jobs = static_cast<int>(std::thread::hardware_concurrency());
  FitFlags plot_fit;
  plot->add_option("--manifest", plot_manifest, "dataset manifest")->required();
  plot->add_option("--out", plot_out, "output directory")->required();
  plot->add_option("--seed", plot_seed, "master seed");
  plot->add_option("--jobs", plot_jobs, "parallel workers");
  plot_fit.attach(plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (gen->parsed()) {
      for (const auto& m : mode_names) spec.ambiguous_modes.insert(ambiguous_mode_from_string(m));
      spec.seed = gen_seed;
      if (!gen_out.parent_path().empty() && !fs::exists(gen_out.parent_path()))
        throw ParseError("output directory parent does not exist: " +
                         gen_out.parent_path().string());
      auto samples = generate_corpus_detailed(spec);
      fs::path manifest = write_corpus(samples, gen_out);
      int n_good = 0;
      for (const auto& s : samples) n_good += s.labeled.label == Label::good ? 1 : 0;
      std::cout << "wrote " << samples.size() << " images (" << n_good << " good, "
                << samples.size() - static_cast<std::size_t>(n_good) << " bad) to "
                << gen_out.string() << "\nmanifest: " << manifest.string() << "\n";
    } else if (vec->parsed()) {
      auto entries = read_manifest(vec_manifest);
      if (entries.empty()) throw ParseError("manifest is empty");
      auto rows = vectorize_manifest(entries, vec_method, vec_fit, vec_seed, vec_jobs);
      FeatureTable table;
      table.feature_names = method_feature_names(vec_method);
      table.has_labels = true;
      std::size_t failed = 0;
      for (const auto& r : rows) {
        if (!r.ok) {
          ++failed;
          continue;
        }
        table.ids.push_back(r.id);
        table.rows.push_back(r.features);
        table.labels.push_back(r.label);
      }
      if (table.rows.empty()) throw DataError("all images failed to vectorize");
      write_feature_csv(table, vec_out);
      if (!vec_fit_csv.empty() && vec_method != "gabor") {
        std::ofstream fc(vec_fit_csv);
        fc << "id";
        for (const auto& n : synth_feature_names()) fc << ',' << n;
        fc << ",evals\n";
        for (const auto& r : rows) {
          if (!r.ok) continue;
          fc << r.id;
          for (std::size_t i = 0; i < synth_feature_names().size(); ++i)
            fc << ',' << format_double(r.features[i]);
          fc << ',' << r.evals << '\n';
        }
      }
      std::cout << "vectorized " << table.rows.size() << " images (" << failed
                << " failed) -> " << vec_out.string() << "\n";
    } else if (train->parsed()) {
      run_train_eval(train_features, train_proto.proto, train_ebm_flags.cfg, train_seed,
                     train_model, train_report, train_metrics, 0, 0);
    } else if (eval->parsed()) {
      if (!eval_model_in.empty()) {
        EbmModel model = load_ebm(eval_model_in);
        FeatureTable table = read_feature_csv(eval_features);
        if (!table.has_labels) throw ParseError("feature CSV has no label column");
        std::vector<Label> pred;
        for (const auto& row : table.rows) {
          FeatureVector fv{table.feature_names, row};
          pred.push_back(predict_class(model, fv));
        }
        Metrics m = compute_metrics(pred, table.labels);
        std::string report = format_metrics_report(m, "model evaluation");
        std::cout << report;
        if (!eval_report.empty()) std::ofstream(eval_report) << report;
        if (!eval_metrics.empty())
          std::ofstream(eval_metrics) << kMetricsCsvHeader << '\n'
                                      << metrics_csv_row(m, "model") << '\n';
      } else {
        int k_lo = eval_k_sweep.size() == 2 ? eval_k_sweep[0] : 0;
        int k_hi = eval_k_sweep.size() == 2 ? eval_k_sweep[1] : 0;
        run_train_eval(eval_features, eval_proto.proto, eval_ebm_flags.cfg, eval_seed,
                       eval_model_out, eval_report, eval_metrics, k_lo, k_hi);
      }
    } else if (explain->parsed()) {
      EbmModel model = load_ebm(ex_model);
      fs::create_directories(ex_out);
      if (!ex_features.empty()) {
        FeatureTable table = read_feature_csv(ex_features);
        auto imp = feature_importance(model, table.rows);
        write_importance_csv(imp, ex_out / "importance.csv");
        write_importance_svg(imp, ex_out / "importance.svg");
        for (const auto& term : model.terms) {
          write_curve_csv(model, term.name, ex_out / ("curve_" + sanitize(term.name) + ".csv"));
          write_curve_svg(model, term.name, ex_out / ("curve_" + sanitize(term.name) + ".svg"));
        }
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
          bool wanted = ex_all_local;
          for (const auto& id : ex_ids) wanted |= id == table.ids[i];
          if (!wanted) continue;
          Explanation ex = explain_local(model, table.row_vector(i));
          write_local_csv(ex, ex_out / ("local_" + sanitize(table.ids[i]) + ".csv"));
          write_local_svg(ex, ex_out / ("local_" + sanitize(table.ids[i]) + ".svg"));
        }
        std::cout << "explanations written to " << ex_out.string() << "\n";
      } else if (!ex_image.empty()) {
        Image img = load_and_prepare(ex_image);
        FeatureVector fv;
        Filterbank bank = make_default_filterbank();
        if (ex_method == "gabor") {
          fv = vectorize_gabor(img, bank);
        } else {
          FitResult fr = fit_synthetic(img, ex_fit.config(ex_seed));
          fv = vectorize_synth(fr);
          if (ex_method == "hybrid") fv = hybrid_vector(fv, img, bank);
          write_fit_overlay_svg(img, fr, ex_out / (sanitize(img.id) + "_fit.svg"));
        }
        Explanation ex = explain_local(model, fv);
        write_local_csv(ex, ex_out / ("local_" + sanitize(img.id) + ".csv"));
        write_local_svg(ex, ex_out / ("local_" + sanitize(img.id) + ".svg"));
        std::cout << "local explanation: total=" << format_double(ex.total) << " predicted="
                  << to_string(ex.predicted) << "\n";
      } else {
        throw ParseError("explain requires --features or --image");
      }
    } else if (plot->parsed()) {
      auto entries = read_manifest(plot_manifest);
      if (entries.empty()) throw ParseError("manifest is empty");
      fs::create_directories(plot_out);
      auto rows = vectorize_manifest(entries, "synth", plot_fit, plot_seed, plot_jobs, plot_out);
      std::ofstream fc(plot_out / "fits.csv");
      fc << "id";
      for (const auto& n : synth_feature_names()) fc << ',' << n;
      fc << ",evals\n";
      std::size_t failed = 0;
      for (const auto& r : rows) {
        if (!r.ok) {
          ++failed;
          continue;
        }
        fc << r.id;
        for (double v : r.features) fc << ',' << format_double(v);
        fc << ',' << r.evals << '\n';
      }
      std::cout << "wrote overlays for " << rows.size() - failed << " images (" << failed
                << " failed) to " << plot_out.string() << "\n";
    }
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InvalidArgumentError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputeError;
  }
  return 0;
}
