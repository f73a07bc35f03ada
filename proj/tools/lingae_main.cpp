#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "lingae/lingae.hpp"

namespace {

using namespace lingae;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerifyFailed = 2;
constexpr int kExitData = 3;

struct Options {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> task;
  std::optional<std::string> variant;
  std::optional<std::string> features;
  std::optional<std::size_t> dim;
  std::optional<std::size_t> hidden;
  std::optional<std::string> data;
  std::optional<std::size_t> overlap;
  std::optional<std::size_t> seeds;
  std::optional<std::string> loss_history;
  std::string node_scoring = "incident";
  std::optional<std::size_t> instances;
  bool inject_rank_deficient = false;
  bool quiet = false;
};

Config load_config(const Options& o) {
  if (!o.config) return Config{};
  return Config::load(*o.config);
}

// Writes to --out when given, otherwise stdout.
template <class F>
void emit(const Options& o, F&& write) {
  if (!o.out) {
    write(std::cout);
    return;
  }
  std::ofstream f(*o.out);
  if (!f) throw DataError("cannot write " + *o.out);
  write(f);
}

bool parse_on_off(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw ConfigError("--features must be on or off, got '" + v + "'");
}

void apply_dims(const Options& o, TrainConfig& t) {
  if (o.dim) {
    t.embedding_dim = *o.dim;
    t.hidden_dim = default_hidden_dim(*o.dim);
  }
  if (o.hidden) t.hidden_dim = *o.hidden;
}

SynthConfig synth_config(const Config& c, const Options& o) {
  c.expect_keys("synth", {"n", "g", "density_low", "density_high", "seed", "overlap"});
  SynthConfig s;
  if (auto v = c.get<std::size_t>("synth", "n")) s.n = *v;
  if (auto v = c.get<std::size_t>("synth", "g")) s.g = *v;
  if (auto v = c.get<double>("synth", "density_low")) s.density_low = *v;
  if (auto v = c.get<double>("synth", "density_high")) s.density_high = *v;
  if (auto v = c.get<std::uint64_t>("synth", "seed")) s.seed = *v;
  if (o.seed) s.seed = *o.seed;
  return s;
}

std::optional<std::size_t> synth_overlap(const Config& c, const Options& o) {
  if (o.overlap) return o.overlap;
  return c.get<std::size_t>("synth", "overlap");
}

// A dataset directory when --data is given, else a synthetic graph whose
// features are perturbed to the requested overlap.
Graph load_or_generate(const Config& c, const Options& o, std::string& id) {
  if (o.data) {
    id = std::filesystem::path(*o.data).filename().string();
    return load_dataset(*o.data);
  }
  id = "synthetic";
  Graph g = generate(synth_config(c, o));
  if (auto ov = synth_overlap(c, o)) g.features = perturb_features(*g.features, *ov);
  return g;
}

int cmd_synth(const Options& o) {
  if (!o.out) throw ConfigError("synth: --out DIR is required");
  const Config c = load_config(o);
  Graph g = generate(synth_config(c, o));
  if (auto ov = synth_overlap(c, o)) g.features = perturb_features(*g.features, *ov);
  save_dataset(*o.out, g);
  std::cout << "nodes=" << g.n << " edges=" << g.edge_count() << " density=" << off_diagonal_density(g) << '\n';
  return kExitOk;
}

int cmd_train(const Options& o) {
  const Config c = load_config(o);
  auto keys = std::vector<std::string>{"task", "variant", "features"};
  keys.insert(keys.end(), lingae::detail::kTrainKeys.begin(), lingae::detail::kTrainKeys.end());
  c.expect_keys("train", keys);
  RunSpec spec;
  spec.task = parse_task(o.task.value_or(c.get_string("train", "task").value_or("link")));
  const std::size_t dim = spec.task == Task::LinkPrediction ? 16 : 4;
  spec.train.embedding_dim = dim;
  spec.train.hidden_dim = default_hidden_dim(dim);
  lingae::detail::read_train_keys(c, "train", spec.train);
  spec.variant = parse_variant(o.variant.value_or(c.get_string("train", "variant").value_or("linear")));
  spec.use_features = parse_on_off(o.features.value_or(c.get_string("train", "features").value_or("on")));
  spec.node_scoring = o.node_scoring == "all" ? NodeScoring::AllPairs : NodeScoring::Incident;
  apply_dims(o, spec.train);
  spec.train.seed = o.seed.value_or(0);
  const Graph g = load_or_generate(c, o, spec.dataset);
  if (spec.use_features && g.featureless()) throw DataError("train: --features on but the dataset has no features");
  if (spec.use_features) {
    spec.misalignment = misalignment(g).subspace_angle_sum;
    if (!o.data) spec.overlap_dim = synth_overlap(c, o);
  }
  std::vector<double> history;
  const MetricsRecord r = run_single(g, spec, &history);
  emit(o, [&](std::ostream& out) { write_metrics_csv(out, {r}); });
  if (o.loss_history) {
    std::ofstream f(*o.loss_history);
    if (!f) throw DataError("cannot write " + *o.loss_history);
    f << "epoch,loss\n";
    for (std::size_t e = 0; e < history.size(); ++e) f << e + 1 << ',' << lingae::detail::format_real(history[e]) << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  SweepConfig cfg = SweepConfig::from(load_config(o));
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.seeds) cfg.seeds = *o.seeds;
  if (o.task) cfg.tasks = {parse_task(*o.task)};
  if (o.variant) cfg.variants = {parse_variant(*o.variant)};
  if (o.features) {
    if (parse_on_off(*o.features))
      cfg.featureless = false;
    else
      cfg.overlaps.clear();
  }
  apply_dims(o, cfg.train);
  const auto rows = run_synth_sweep(cfg, [&](const MetricsRecord& r) {
    if (!o.quiet) std::cerr << format_record(r) << '\n';
  });
  emit(o, [&](std::ostream& out) { write_metrics_csv(out, rows); });
  return kExitOk;
}

int cmd_real(const Options& o) {
  const Config c = load_config(o);
  RealConfig cfg = RealConfig::from(c);
  if (o.task) cfg.set_task_defaults(parse_task(*o.task));
  if (o.data) cfg.dataset_dir = *o.data;
  if (cfg.dataset_dir.empty()) throw ConfigError("real: --data DIR (or dataset = DIR in [real]) is required");
  if (cfg.dataset_id.empty()) cfg.dataset_id = std::filesystem::path(cfg.dataset_dir).filename().string();
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.seeds) cfg.seeds = *o.seeds;
  if (o.variant) cfg.variants = {parse_variant(*o.variant)};
  if (o.features) cfg.feature_modes = {parse_on_off(*o.features)};
  apply_dims(o, cfg.train);
  const Graph g = load_dataset(cfg.dataset_dir);
  const auto rows = run_real(g, cfg, [&](const MetricsRecord& r) {
    if (!o.quiet) std::cerr << format_record(r) << '\n';
  });
  emit(o, [&](std::ostream& out) { write_metrics_csv(out, rows); });
  write_summary(std::cout, summarize(rows));
  return kExitOk;
}

int cmd_verify(const Options& o) {
  const Config c = load_config(o);
  c.expect_keys("verify", {"seed", "instances"});
  SuiteOptions opt;
  opt.seed = o.seed.value_or(c.get<std::uint64_t>("verify", "seed").value_or(0));
  opt.instances = o.instances.value_or(c.get<std::size_t>("verify", "instances").value_or(10));
  opt.rank_deficient_theorem1 = o.inject_rank_deficient;

  std::size_t failures = 0, hypothesis = 0;
  auto report = [&](std::ostream& out) {
    out << "statement,instance,residual,tolerance,status\n";
    for (auto suite : {theorem1_suite, prop1_suite, prop2_suite, prop3_suite, prop4_suite}) {
      for (const auto& r : suite(opt)) {
        const char* status = "PASS";
        if (!r.hypothesis_met) {
          status = "HYPOTHESIS_VIOLATED";
          ++hypothesis;
        } else if (!r.holds) {
          status = "FAIL";
          ++failures;
        }
        char residual[32];
        std::snprintf(residual, sizeof residual, "%.3e", r.residual);
        out << r.statement << ",\"" << r.instance << "\"," << residual << ',' << r.tolerance << ',' << status << '\n';
      }
    }
  };
  emit(o, report);
  std::cerr << "verify: " << failures << " failure(s), " << hypothesis << " hypothesis violation(s)\n";
  return failures ? kExitVerifyFailed : kExitOk;
}

int cmd_report_alignment(const Options& o) {
  const Config c = load_config(o);
  std::string id;
  const Graph g = load_or_generate(c, o, id);
  if (g.featureless()) throw DataError("report-alignment: dataset has no features");
  MisalignmentReport r = misalignment(g);
  if (!o.data) r.overlap_dim = synth_overlap(c, o);
  emit(o, [&](std::ostream& out) {
    out << "dataset,overlap_dim,d_algn,subspace_angle_sum,clamped_entries\n" << id << ',';
    if (r.overlap_dim) out << *r.overlap_dim;
    out << ',' << lingae::detail::format_real(r.d_algn) << ',' << lingae::detail::format_real(r.subspace_angle_sum) << ','
        << r.clamped_entries << '\n';
  });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear and relu graph auto-encoders: experiments and theory checks"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "flat key = value config file");
    sub->add_option("--seed", o.seed, "random seed (base seed for multi-seed runs)");
    sub->add_option("--out", o.out, "output path");
  };
  auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--task", o.task, "link or node")->check(CLI::IsMember({"link", "node"}));
    sub->add_option("--variant", o.variant, "linear or relu")->check(CLI::IsMember({"linear", "relu"}));
    sub->add_option("--features", o.features, "on or off")->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--dim", o.dim, "embedding dimension")->check(CLI::PositiveNumber);
    sub->add_option("--hidden", o.hidden, "hidden layer width")->check(CLI::PositiveNumber);
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset directory");
  common(synth);
  synth->add_option("--overlap", o.overlap, "perturb features to this overlap dimension");

  auto* train_cmd = app.add_subcommand("train", "train one model and write its metrics row");
  common(train_cmd);
  model_flags(train_cmd);
  train_cmd->add_option("--data", o.data, "dataset directory (default: synthetic)");
  train_cmd->add_option("--overlap", o.overlap, "synthetic feature overlap dimension");
  train_cmd->add_option("--loss-history", o.loss_history, "write per-epoch loss CSV here");
  train_cmd->add_option("--node-scoring", o.node_scoring, "node task test pairs: incident or all")
      ->check(CLI::IsMember({"incident", "all"}));

  auto* sweep = app.add_subcommand("sweep", "synthetic misalignment sweep");
  common(sweep);
  model_flags(sweep);
  sweep->add_option("--seeds", o.seeds, "number of seeds");
  sweep->add_flag("--quiet", o.quiet, "no per-run progress on stderr");

  auto* real = app.add_subcommand("real", "10-seed table on a real dataset");
  common(real);
  model_flags(real);
  real->add_option("--data", o.data, "dataset directory with edges.txt and features.csv");
  real->add_option("--seeds", o.seeds, "number of seeds");
  real->add_flag("--quiet", o.quiet, "no per-run progress on stderr");

  auto* verify = app.add_subcommand("verify", "run the theorem and proposition oracles");
  common(verify);
  verify->add_option("--instances", o.instances, "instances per statement")->check(CLI::PositiveNumber);
  verify->add_flag("--inject-rank-deficient", o.inject_rank_deficient,
                   "give the Theorem-1 suite rank-deficient adjacencies");

  auto* align = app.add_subcommand("report-alignment", "print the misalignment of a dataset");
  common(align);
  align->add_option("--data", o.data, "dataset directory (default: synthetic)");
  align->add_option("--overlap", o.overlap, "synthetic feature overlap dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*train_cmd) return cmd_train(o);
    if (*sweep) return cmd_sweep(o);
    if (*real) return cmd_real(o);
    if (*verify) return cmd_verify(o);
    if (*align) return cmd_report_alignment(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
