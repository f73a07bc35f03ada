#pragma once

// Experiment runners: one training run per MetricsRecord, the synthetic
// misalignment sweep, the real-dataset table, and CSV persistence.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "lingae/alignment.hpp"
#include "lingae/eval.hpp"
#include "lingae/graph.hpp"
#include "lingae/io.hpp"
#include "lingae/model.hpp"
#include "lingae/synth.hpp"

namespace lingae {

inline const char* to_string(Task t) { return t == Task::LinkPrediction ? "link" : "node"; }

inline Task parse_task(std::string_view s) {
  if (s == "link") return Task::LinkPrediction;
  if (s == "node") return Task::NodePrediction;
  throw ConfigError("unknown task '" + std::string(s) + "' (expected link or node)");
}

inline Variant parse_variant(std::string_view s) {
  if (s == "linear") return Variant::Linear;
  if (s == "relu") return Variant::Relu;
  throw ConfigError("unknown variant '" + std::string(s) + "' (expected linear or relu)");
}

struct MetricsRecord {
  std::string dataset;
  Task task = Task::LinkPrediction;
  Variant variant = Variant::Linear;
  bool features = false;
  std::optional<std::size_t> overlap_dim;
  std::optional<double> misalignment;
  std::uint64_t seed = 0;
  double train_auc = 0.0;
  double test_auc = 0.0;
  double final_loss = 0.0;
  double wall_time_s = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "dataset,task,variant,features,overlap_dim,misalignment,seed,train_auc,test_auc,final_loss,wall_time_s";

namespace detail {
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
}  // namespace detail

inline std::string format_record(const MetricsRecord& r, bool with_wall_time = true) {
  std::ostringstream s;
  s << r.dataset << ',' << to_string(r.task) << ',' << to_string(r.variant) << ',' << (r.features ? "on" : "off") << ',';
  if (r.overlap_dim) s << *r.overlap_dim;
  s << ',';
  if (r.misalignment) s << detail::format_real(*r.misalignment);
  s << ',' << r.seed << ',' << detail::format_real(r.train_auc) << ',' << detail::format_real(r.test_auc) << ','
    << detail::format_real(r.final_loss) << ',';
  if (with_wall_time) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_time_s);
    s << buf;
  }
  return s.str();
}

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& rows, bool with_wall_time = true) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << format_record(r, with_wall_time) << '\n';
}

/// One training run. `g` carries the features the run should see; with
/// use_features false they are ignored and the identity is used.
struct RunSpec {
  std::string dataset;
  Task task = Task::LinkPrediction;
  Variant variant = Variant::Linear;
  bool use_features = true;
  std::optional<std::size_t> overlap_dim;
  std::optional<double> misalignment;
  TrainConfig train;  // train.seed seeds the split, the weights and the negatives
  NodeScoring node_scoring = NodeScoring::Incident;
};

inline MetricsRecord run_single(const Graph& g, const RunSpec& spec, std::vector<double>* loss_history = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  const bool features = spec.use_features && g.features.has_value();
  MetricsRecord r{spec.dataset, spec.task, spec.variant, features, spec.overlap_dim,
                  features ? spec.misalignment : std::nullopt, spec.train.seed};
  AucPair a;
  if (spec.task == Task::LinkPrediction) {
    auto [train_graph, plan] = split_edges(g, spec.train.seed);
    const auto trained = train(train_graph, spec.train, spec.variant, features);
    a = link_task_eval(g, trained.embedding, plan);
    r.final_loss = trained.final_loss;
    if (loss_history) *loss_history = trained.loss_history;
  } else {
    auto [train_graph, plan] = split_nodes(g, spec.train.seed);
    const auto trained = train(train_graph, spec.train, spec.variant, features);
    a = node_task_eval(g, trained, plan, features, spec.node_scoring);
    r.final_loss = trained.final_loss;
    if (loss_history) *loss_history = trained.loss_history;
  }
  r.train_auc = a.train;
  r.test_auc = a.test;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// ---------------------------------------------------------------------------
// Training options shared by every subcommand

namespace detail {
inline const std::vector<std::string> kTrainKeys = {"epochs", "learning_rate", "beta1",     "beta2",
                                                    "epsilon", "lambda",       "dim",       "hidden"};

inline void read_train_keys(const Config& c, const std::string& section, TrainConfig& t) {
  if (auto v = c.get<std::size_t>(section, "epochs")) t.epochs = *v;
  if (auto v = c.get<double>(section, "learning_rate")) t.learning_rate = *v;
  if (auto v = c.get<double>(section, "beta1")) t.beta1 = *v;
  if (auto v = c.get<double>(section, "beta2")) t.beta2 = *v;
  if (auto v = c.get<double>(section, "epsilon")) t.epsilon = *v;
  if (auto v = c.get<double>(section, "lambda")) t.embed_norm_coeff = *v;
  if (auto v = c.get<std::size_t>(section, "dim")) {
    t.embedding_dim = *v;
    t.hidden_dim = default_hidden_dim(*v);
  }
  if (auto v = c.get<std::size_t>(section, "hidden")) t.hidden_dim = *v;
}

template <class T, class F>
std::vector<T> parse_list(const Config& c, const std::string& section, const std::string& key, std::vector<T> fallback,
                          F convert) {
  auto raw = c.get_list<std::string>(section, key);
  if (!raw) return fallback;
  std::vector<T> out;
  for (const auto& s : *raw) out.push_back(convert(s));
  return out;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Synthetic sweep

struct SweepConfig {
  SynthConfig synth;
  std::vector<std::size_t> overlaps{64, 32, 16, 8, 4, 2, 0};
  bool featureless = true;
  std::size_t seeds = 10;
  std::uint64_t base_seed = 0;
  std::vector<Variant> variants{Variant::Linear, Variant::Relu};
  std::vector<Task> tasks{Task::LinkPrediction, Task::NodePrediction};
  TrainConfig train = [] {
    TrainConfig t;
    t.embedding_dim = 8;
    t.hidden_dim = default_hidden_dim(8);
    return t;
  }();

  /// Reads the [sweep] section; absent keys keep their defaults.
  static SweepConfig from(const Config& c) {
    const std::string s = "sweep";
    auto keys = detail::kTrainKeys;
    keys.insert(keys.end(), {"n", "g", "density_low", "density_high", "overlaps", "featureless", "seeds", "seed",
                             "variants", "tasks"});
    c.expect_keys(s, keys);
    SweepConfig out;
    if (auto v = c.get<std::size_t>(s, "n")) out.synth.n = *v;
    if (auto v = c.get<std::size_t>(s, "g")) out.synth.g = *v;
    if (auto v = c.get<double>(s, "density_low")) out.synth.density_low = *v;
    if (auto v = c.get<double>(s, "density_high")) out.synth.density_high = *v;
    if (auto v = c.get_list<std::size_t>(s, "overlaps")) out.overlaps = *v;
    if (auto v = c.get<bool>(s, "featureless")) out.featureless = *v;
    if (auto v = c.get<std::size_t>(s, "seeds")) out.seeds = *v;
    if (auto v = c.get<std::uint64_t>(s, "seed")) out.base_seed = *v;
    out.variants = detail::parse_list<Variant>(c, s, "variants", out.variants, parse_variant);
    out.tasks = detail::parse_list<Task>(c, s, "tasks", out.tasks, parse_task);
    detail::read_train_keys(c, s, out.train);
    return out;
  }
};

/// Misalignment reported in the sweep: the sum of principal angles between
/// span(ÃX) and span(X).
inline double sweep_misalignment(const DiffusionMatrix& diff, const DenseMatrix& x) {
  return misalignment(diff, x).subspace_angle_sum;
}

using ProgressFn = std::function<void(const MetricsRecord&)>;

/// Rows ordered by seed, then overlap (as listed, featureless last), task,
/// variant.
inline std::vector<MetricsRecord> run_synth_sweep(const SweepConfig& cfg, const ProgressFn& progress = {}) {
  cfg.synth.validate();
  cfg.train.validate();
  for (std::size_t ov : cfg.overlaps)
    if (ov > cfg.synth.g) throw ConfigError("sweep: overlap " + std::to_string(ov) + " exceeds g");
  std::vector<MetricsRecord> rows;
  for (std::size_t k = 0; k < cfg.seeds; ++k) {
    const std::uint64_t seed = cfg.base_seed + k;
    SynthConfig sc = cfg.synth;
    sc.seed = seed;
    const Graph base = generate(sc);
    const DiffusionMatrix diff = diffusion(base);
    std::vector<std::optional<std::size_t>> settings(cfg.overlaps.begin(), cfg.overlaps.end());
    if (cfg.featureless) settings.push_back(std::nullopt);
    for (const auto& ov : settings) {
      Graph g{base.n, base.adjacency, std::nullopt};
      std::optional<double> mis;
      if (ov) {
        g.features = perturb_features(*base.features, *ov);
        mis = sweep_misalignment(diff, *g.features);
      }
      for (Task task : cfg.tasks)
        for (Variant variant : cfg.variants) {
          RunSpec spec{"synthetic", task, variant, ov.has_value(), ov, mis, cfg.train};
          spec.train.seed = seed;
          rows.push_back(run_single(g, spec));
          if (progress) progress(rows.back());
        }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Real datasets

struct RealConfig {
  std::string dataset_dir;
  std::string dataset_id;  // defaults to the directory name
  Task task = Task::LinkPrediction;
  std::size_t seeds = 10;
  std::uint64_t base_seed = 0;
  std::vector<Variant> variants{Variant::Linear, Variant::Relu};
  std::vector<bool> feature_modes{true, false};
  TrainConfig train = [] {
    TrainConfig t;
    t.embedding_dim = 16;
    t.hidden_dim = default_hidden_dim(16);
    return t;
  }();

  /// Embedding dimension 16 for the link task, 4 for the node task.
  void set_task_defaults(Task t) {
    task = t;
    train.embedding_dim = t == Task::LinkPrediction ? 16 : 4;
    train.hidden_dim = default_hidden_dim(train.embedding_dim);
  }

  static RealConfig from(const Config& c) {
    const std::string s = "real";
    auto keys = detail::kTrainKeys;
    keys.insert(keys.end(), {"dataset", "name", "task", "seeds", "seed", "variants", "features"});
    c.expect_keys(s, keys);
    RealConfig out;
    if (auto v = c.get_string(s, "task")) out.set_task_defaults(parse_task(*v));
    if (auto v = c.get_string(s, "dataset")) out.dataset_dir = *v;
    if (auto v = c.get_string(s, "name")) out.dataset_id = *v;
    if (auto v = c.get<std::size_t>(s, "seeds")) out.seeds = *v;
    if (auto v = c.get<std::uint64_t>(s, "seed")) out.base_seed = *v;
    out.variants = detail::parse_list<Variant>(c, s, "variants", out.variants, parse_variant);
    out.feature_modes = detail::parse_list<bool>(c, s, "features", out.feature_modes, [](const std::string& v) {
      if (v == "on") return true;
      if (v == "off") return false;
      throw ConfigError("unknown feature mode '" + v + "' (expected on or off)");
    });
    detail::read_train_keys(c, s, out.train);
    return out;
  }
};

/// Rows ordered by seed, then variant, then feature mode.
inline std::vector<MetricsRecord> run_real(const Graph& g, const RealConfig& cfg, const ProgressFn& progress = {}) {
  cfg.train.validate();
  std::vector<MetricsRecord> rows;
  for (std::size_t k = 0; k < cfg.seeds; ++k)
    for (Variant variant : cfg.variants)
      for (bool features : cfg.feature_modes) {
        if (features && g.featureless()) throw DataError("run_real: features requested but dataset has none");
        RunSpec spec{cfg.dataset_id, cfg.task, variant, features, std::nullopt, std::nullopt, cfg.train};
        spec.train.seed = cfg.base_seed + k;
        rows.push_back(run_single(g, spec));
        if (progress) progress(rows.back());
      }
  return rows;
}

struct CellSummary {
  std::string dataset;
  Task task;
  Variant variant;
  bool features;
  std::size_t runs = 0;
  double mean_test_auc = 0.0;
  double std_test_auc = 0.0;  // sample standard deviation
};

/// Mean ± std of test AUC per (dataset, task, variant, features) cell, in
/// first-appearance order.
inline std::vector<CellSummary> summarize(const std::vector<MetricsRecord>& rows) {
  std::vector<CellSummary> cells;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const CellSummary& c) {
      return c.dataset == r.dataset && c.task == r.task && c.variant == r.variant && c.features == r.features;
    });
    if (it == cells.end()) {
      cells.push_back({r.dataset, r.task, r.variant, r.features});
      values.emplace_back();
      it = cells.end() - 1;
    }
    values[static_cast<std::size_t>(it - cells.begin())].push_back(r.test_auc);
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& v = values[c];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    cells[c].runs = v.size();
    cells[c].mean_test_auc = mean;
    cells[c].std_test_auc = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return cells;
}

inline void write_summary(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << "dataset,task,variant,features,runs,mean_test_auc,std_test_auc\n";
  for (const auto& c : cells)
    out << c.dataset << ',' << to_string(c.task) << ',' << to_string(c.variant) << ',' << (c.features ? "on" : "off")
        << ',' << c.runs << ',' << detail::format_real(c.mean_test_auc) << ',' << detail::format_real(c.std_test_auc)
        << '\n';
}

}  // namespace lingae
