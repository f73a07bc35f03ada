// Acceptance gate. `acceptance N` runs criterion N; with no argument all of
// them run in order. Each criterion prints one [PASS]/[FAIL]/[SKIP] line.
// Exit status: 0 pass, 1 fail, 77 skip (single criterion only).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lingae/lingae.hpp"

using namespace lingae;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Verdict pass_if(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

Verdict from_reports(const std::vector<TheoremReport>& reports, double limit_s, Clock::time_point start) {
  std::size_t failures = 0;
  double worst = 0.0;
  std::string first;
  for (const auto& r : reports) {
    if (!r.hypothesis_met || !r.holds) {
      if (first.empty()) first = "; first failure " + r.statement + " [" + r.instance + "]";
      ++failures;
    }
    if (std::isfinite(r.residual)) worst = std::max(worst, r.residual);
  }
  const double t = seconds_since(start);
  return pass_if(failures == 0 && t < limit_s, std::to_string(reports.size()) + " instances, " +
                                                   std::to_string(failures) + " failures, max residual " +
                                                   fmt("%.3g", worst) + ", " + fmt("%.1f", t) + "s" + first);
}

SuiteOptions suite(std::uint64_t seed, std::size_t instances) {
  SuiteOptions opt;
  opt.seed = seed;
  opt.instances = instances;
  return opt;
}

// -------------------------------------------------------------------------
// Theory

Verdict c1() {
  const auto start = Clock::now();
  return from_reports(theorem1_suite(suite(1, 200)), 60.0, start);
}

Verdict c2() {
  const auto start = Clock::now();
  return from_reports(prop1_suite(suite(2, 20)), 120.0, start);
}

Verdict c3() {
  const auto start = Clock::now();
  bool ok = true;
  std::string detail;
  const std::pair<const char*, std::vector<TheoremReport> (*)(const SuiteOptions&)> suites[] = {
      {"prop2", prop2_suite}, {"prop3", prop3_suite}, {"prop4 (residual = misaligned recovery)", prop4_suite}};
  for (const auto& [name, run] : suites) {
    const auto v = from_reports(run(suite(3, 50)), 60.0, start);
    ok = ok && v.outcome == Outcome::Pass;
    detail += std::string(name) + ": " + v.detail + "; ";
  }
  return pass_if(ok, detail + fmt("%.1f", seconds_since(start)) + "s total");
}

// -------------------------------------------------------------------------
// Numerics

Verdict c4() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t k = 0; k < 20; ++k)
    for (Variant variant : {Variant::Linear, Variant::Relu}) {
      std::mt19937_64 rng(4000 + k);
      const Graph g = instances::random_graph(12, 0.3, rng);
      const DiffusionMatrix diff = diffusion(g);
      const DenseMatrix x = k % 2 ? DenseMatrix::identity(12) : instances::gaussian(12, 5, rng);
      EncoderParams p{variant, instances::gaussian(x.cols(), 4, rng), instances::gaussian(4, 3, rng)};
      // resample W0 until no pre-activation sits within 1e-4 of the relu kink
      auto near_kink = [&] {
        if (variant == Variant::Linear) return false;
        const DenseMatrix pre = matmul(spmm(diff.matrix, x), p.w0);
        for (double v : pre.data())
          if (std::abs(v) < 1e-4) return true;
        return false;
      };
      while (near_kink()) p.w0 = instances::gaussian(x.cols(), 4, rng);
      const double lambda = 1e-2;
      const auto analytic = gradients(g.adjacency, diff, x, p, lambda);
      auto sweep = [&](DenseMatrix EncoderParams::*which, const DenseMatrix& grad) {
        for (std::size_t e = 0; e < grad.size(); ++e) {
          auto plus = p, minus = p;
          const double h = 1e-5;
          (plus.*which).data()[e] += h;
          (minus.*which).data()[e] -= h;
          const double fd = (loss(g.adjacency, encode(plus, diff, x), lambda) -
                             loss(g.adjacency, encode(minus, diff, x), lambda)) /
                            (2 * h);
          const double a = grad.data()[e];
          worst = std::max(worst, std::abs(fd - a) / std::max(1e-6, std::max(std::abs(fd), std::abs(a))));
          ++checked;
        }
      };
      sweep(&EncoderParams::w0, analytic.w0);
      sweep(&EncoderParams::w1, analytic.w1);
    }
  const double t = seconds_since(start);
  return pass_if(worst < 1e-5 && t < 60.0, "40 instances, " + std::to_string(checked) +
                                               " entries, max relative error " + fmt("%.3g", worst) + ", " +
                                               fmt("%.1f", t) + "s");
}

Verdict c5() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  std::size_t with_ties = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> size(1, 60), level(0, 9);
    std::vector<double> pos(static_cast<std::size_t>(size(rng))), neg(static_cast<std::size_t>(size(rng)));
    // coarse levels force ties within and across the two sets
    for (double& v : pos) v = 0.1 * level(rng);
    for (double& v : neg) v = 0.1 * level(rng) - 0.05 * (trial % 2);
    double count = 0.0;
    bool tie = false;
    for (double a : pos)
      for (double b : neg) {
        count += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
        tie = tie || a == b;
      }
    with_ties += tie;
    const double brute = count / static_cast<double>(pos.size() * neg.size());
    worst = std::max(worst, std::abs(auc(pos, neg) - brute));
  }
  return pass_if(worst <= 1e-12, "100 score sets (" + std::to_string(with_ties) +
                                     " with cross-set ties), max |rank - brute| " + fmt("%.3g", worst));
}

// -------------------------------------------------------------------------
// Synthetic experiments

const std::vector<std::size_t> kOverlaps{64, 32, 16, 8, 4, 2, 0};
const std::vector<double> kTargetAxis{39.6, 58.9, 70.9, 78.0, 79.0, 82.0, 84.0};

Verdict c6() {
  const auto start = Clock::now();
  std::vector<double> mean(kOverlaps.size(), 0.0), mean_literal(kOverlaps.size(), 0.0);
  std::size_t non_monotone = 0;
  const std::size_t seeds = 10;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    SynthConfig sc;
    sc.seed = seed;
    const Graph g = generate(sc);
    const DiffusionMatrix diff = diffusion(g);
    double previous = -1.0;
    for (std::size_t i = 0; i < kOverlaps.size(); ++i) {
      const auto m = misalignment(diff, perturb_features(*g.features, kOverlaps[i]));
      if (!(m.subspace_angle_sum > previous)) ++non_monotone;
      previous = m.subspace_angle_sum;
      mean[i] += m.subspace_angle_sum / seeds;
      mean_literal[i] += m.d_algn / seeds;
    }
  }
  bool within = true;
  std::ostringstream values, literal;
  for (std::size_t i = 0; i < kOverlaps.size(); ++i) {
    within = within && std::abs(mean[i] - kTargetAxis[i]) <= 0.15 * kTargetAxis[i];
    values << (i ? " " : "") << fmt("%.1f", mean[i]);
    literal << (i ? " " : "") << fmt("%.1f", mean_literal[i]);
  }
  return pass_if(non_monotone == 0 && within,
                 "subspace-angle misalignment by overlap 64..0: " + values.str() + " (target 39.6 58.9 70.9 78 79 82 84 +-15%); " +
                     std::to_string(non_monotone) + " non-increasing steps over " + std::to_string(seeds) +
                     " seeds; trace-arccos form: " + literal.str() + "; " + fmt("%.1f", seconds_since(start)) + "s");
}

struct Cell {
  double train = 0.0;
  double test = 0.0;
};

// Mean train/test AUC of one synthetic configuration over seeds 0..9.
Cell synthetic_cell(Task task, Variant variant, std::optional<std::size_t> overlap) {
  Cell c;
  const int seeds = 10;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    SynthConfig sc;
    sc.seed = seed;
    Graph g = generate(sc);
    if (overlap)
      g.features = perturb_features(*g.features, *overlap);
    else
      g.features.reset();
    RunSpec spec{"synthetic", task, variant, overlap.has_value(), overlap, std::nullopt, {}};
    spec.train.embedding_dim = 8;
    spec.train.hidden_dim = default_hidden_dim(8);
    spec.train.seed = seed;
    const auto r = run_single(g, spec);
    c.train += r.train_auc / seeds;
    c.test += r.test_auc / seeds;
  }
  return c;
}

Verdict c7() {
  const auto start = Clock::now();
  const Cell aligned = synthetic_cell(Task::LinkPrediction, Variant::Linear, 64);
  const Cell featureless = synthetic_cell(Task::LinkPrediction, Variant::Linear, std::nullopt);
  const double gain = aligned.test - featureless.test;
  const double gap = featureless.train - featureless.test;
  const double t = seconds_since(start);
  return pass_if(gain >= 0.05 && gap >= 0.10 && t < 1800.0,
                 "linear test AUC aligned " + fmt("%.4f", aligned.test) + " vs featureless " +
                     fmt("%.4f", featureless.test) + " (gain " + fmt("%.4f", gain) +
                     ", need >= 0.05); featureless train-test gap " + fmt("%.4f", gap) + " (need >= 0.10); " +
                     fmt("%.0f", t) + "s");
}

Verdict c8() {
  const auto start = Clock::now();
  bool ok = true;
  std::string detail;
  for (Variant v : {Variant::Linear, Variant::Relu}) {
    const Cell featureless = synthetic_cell(Task::NodePrediction, v, std::nullopt);
    const Cell features = synthetic_cell(Task::NodePrediction, v, 64);
    ok = ok && featureless.test > features.test;
    detail += std::string(to_string(v)) + " featureless " + fmt("%.4f", featureless.test) + " vs features " +
              fmt("%.4f", features.test) + "; ";
  }
  const double t = seconds_since(start);
  return pass_if(ok && t < 1800.0, detail + fmt("%.0f", t) + "s");
}

// -------------------------------------------------------------------------
// Real data

std::optional<std::filesystem::path> find_dataset(const std::string& name) {
  std::vector<std::filesystem::path> roots;
  if (const char* env = std::getenv("LINGAE_DATA_DIR")) roots.emplace_back(env);
  roots.emplace_back("data");
  for (const auto& root : roots)
    if (std::filesystem::exists(root / name / kEdgeFile)) return root / name;
  return std::nullopt;
}

struct Target {
  Variant variant;
  bool features;
  double expected;
  double tolerance;
};

Verdict real_link(const std::string& name, const std::vector<Target>& targets, double limit_s) {
  const auto dir = find_dataset(name);
  if (!dir) return {Outcome::Skip, name + " not found under $LINGAE_DATA_DIR or ./data"};
  const auto start = Clock::now();
  const Graph g = load_dataset(*dir);
  RealConfig cfg;
  cfg.dataset_id = name;
  cfg.set_task_defaults(Task::LinkPrediction);
  bool ok = true;
  std::string detail;
  for (const auto& t : targets) {
    cfg.variants = {t.variant};
    cfg.feature_modes = {t.features};
    const auto cells = summarize(run_real(g, cfg));
    const double mean = cells.front().mean_test_auc;
    ok = ok && std::abs(mean - t.expected) <= t.tolerance;
    detail += std::string(to_string(t.variant)) + (t.features ? "+features " : " featureless ") +
              fmt("%.4f", mean) + " +- " + fmt("%.4f", cells.front().std_test_auc) + " (target " +
              fmt("%.2f", t.expected) + " +- " + fmt("%.2f", t.tolerance) + "); ";
  }
  const double t = seconds_since(start);
  return pass_if(ok && t < limit_s, detail + fmt("%.0f", t) + "s");
}

Verdict c9() {
  return real_link("cora", {{Variant::Linear, true, 0.91, 0.03}, {Variant::Linear, false, 0.84, 0.03}}, 900.0);
}

Verdict c10() {
  return real_link("citeseer", {{Variant::Linear, true, 0.92, 0.04}, {Variant::Relu, true, 0.84, 0.05}}, 900.0);
}

// -------------------------------------------------------------------------
// Determinism

std::string theory_fingerprint() {
  std::ostringstream out;
  out.precision(17);
  for (auto run : {theorem1_suite, prop1_suite, prop2_suite, prop3_suite, prop4_suite})
    for (const auto& r : run(suite(11, 5))) out << r.statement << r.instance << r.residual << r.holds << '\n';
  return out.str();
}

std::string experiment_fingerprint() {
  std::vector<MetricsRecord> rows;
  SynthConfig sc;
  sc.seed = 11;
  const Graph base = generate(sc);
  for (Task task : {Task::LinkPrediction, Task::NodePrediction})
    for (Variant v : {Variant::Linear, Variant::Relu})
      for (bool features : {true, false}) {
        Graph g = base;
        if (!features) g.features.reset();
        RunSpec spec{"synthetic", task, v, features, std::nullopt, std::nullopt, {}};
        spec.train.embedding_dim = 8;
        spec.train.hidden_dim = default_hidden_dim(8);
        spec.train.seed = 11;
        rows.push_back(run_single(g, spec));
      }
  std::ostringstream out;
  write_metrics_csv(out, rows, false);
  return out.str();
}

Verdict c11() {
  const auto start = Clock::now();
  const bool theory_same = theory_fingerprint() == theory_fingerprint();
  const auto first = experiment_fingerprint();
  const bool runs_same = first == experiment_fingerprint();
  return pass_if(theory_same && runs_same, std::string("theory suites ") + (theory_same ? "identical" : "DIFFER") +
                                               "; 8 training runs (link/node x variant x features) " +
                                               (runs_same ? "byte-identical CSV" : "DIFFER") + "; " +
                                               fmt("%.0f", seconds_since(start)) + "s");
}

struct Criterion {
  const char* name;
  Verdict (*run)();
};

const Criterion kCriteria[] = {
    {"theorem-1 linearization", c1},      {"prop-1 containment", c2},
    {"prop-2/3/4 suites", c3},            {"gradient finite differences", c4},
    {"AUC oracle", c5},                   {"misalignment ordering", c6},
    {"synthetic link prediction", c7},    {"synthetic node prediction", c8},
    {"cora link prediction", c9},         {"citeseer link prediction", c10},
    {"determinism", c11},
};

Outcome run_one(std::size_t k) {
  const auto& c = kCriteria[k - 1];
  Verdict v;
  try {
    v = c.run();
  } catch (const std::exception& e) {
    v = {Outcome::Fail, std::string("exception: ") + e.what()};
  }
  const char* tag = v.outcome == Outcome::Pass ? "[PASS]" : v.outcome == Outcome::Fail ? "[FAIL]" : "[SKIP]";
  std::cout << tag << " C" << k << " " << c.name << ": " << v.detail << std::endl;
  return v.outcome;
}

}  // namespace

int main(int argc, char** argv) {
  constexpr std::size_t count = std::size(kCriteria);
  if (argc > 2) {
    std::cerr << "usage: acceptance [criterion 1-" << count << "]\n";
    return 1;
  }
  if (argc == 2) {
    const std::size_t k = std::strtoul(argv[1], nullptr, 10);
    if (k < 1 || k > count) {
      std::cerr << "criterion must be in 1.." << count << "\n";
      return 1;
    }
    switch (run_one(k)) {
      case Outcome::Pass: return 0;
      case Outcome::Skip: return 77;
      case Outcome::Fail: return 1;
    }
  }
  bool failed = false;
  for (std::size_t k = 1; k <= count; ++k) failed = run_one(k) == Outcome::Fail || failed;
  return failed ? 1 : 0;
}
