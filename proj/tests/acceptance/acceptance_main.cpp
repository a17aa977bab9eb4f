// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.
// Usage: acceptance [AC1 AC6 ...]  (no arguments runs everything)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../silhouette_oracle.hpp"
#include "../test_helpers.hpp"
#include "cli.hpp"
#include "tlstm/autoencoder.hpp"
#include "tlstm/evaluation.hpp"
#include "tlstm/gradcheck.hpp"
#include "tlstm/io.hpp"
#include "tlstm/synth.hpp"
#include "tlstm/trainer.hpp"

using namespace tlstm;
namespace fs = std::filesystem;

namespace {

// Training protocol shared by the benchmark criteria.
constexpr std::size_t kEpochs = 5000;
constexpr double kLearningRate = 0.01;
constexpr NormalizationKind kNormalization = NormalizationKind::kZScore;
constexpr std::uint64_t kSeeds[] = {1, 2, 3};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- trained benchmark models (shared by AC2-AC5) ---------------------------

struct BenchmarkRun {
  Dataset data;
  AutoencoderModel model;
  double seconds = 0.0;
};

const BenchmarkRun& benchmark(int dataset, std::uint64_t seed) {
  static std::map<std::pair<int, std::uint64_t>, BenchmarkRun> cache;
  const auto key = std::make_pair(dataset, seed);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  BenchmarkRun run;
  GeneratorConfig gc;
  gc.seed = seed;
  run.data = generate(dataset, gc);
  ModelDims dims;
  dims.hidden_dim = 2;
  dims.normalization = kNormalization;
  TrainConfig tc;
  tc.epochs = kEpochs;
  tc.learning_rate = kLearningRate;
  tc.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  run.model = train(run.data, dims, tc).model;
  run.seconds = seconds_since(t0);
  std::cout << "  trained dataset " << dataset << " seed " << seed << " in " << fmt(run.seconds, 3)
            << " s" << std::endl;
  return cache.emplace(key, std::move(run)).first->second;
}

struct Silhouettes {
  double hidden = 0.0;
  double memory = 0.0;
  double both = 0.0;
};

Silhouettes silhouettes(const BenchmarkRun& run) {
  std::vector<Vector> h, c, b;
  std::vector<std::string> labels;
  for (const auto& s : run.data) {
    const Embedding e = encode(run.model, s);
    h.push_back(e.part(EmbeddingPart::kHidden));
    c.push_back(e.part(EmbeddingPart::kMemory));
    b.push_back(e.part(EmbeddingPart::kBoth));
    labels.push_back(*s.label);
  }
  return {silhouette(h, labels).average, silhouette(c, labels).average, silhouette(b, labels).average};
}

// ---- criteria ----------------------------------------------------------------

Verdict ac1_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  double worst_unfloored = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    AutoencoderModel model = tlstm::testing::random_model(rng, 3, 0.5);
    model.normalization = {0.5, 1.5};
    const Dataset batch = {tlstm::testing::random_series(rng, 5, "a"),
                           tlstm::testing::random_series(rng, 5, "b")};
    const Vector flat = model.params.flatten();
    const Vector analytic = loss_and_gradient(model, batch).gradient.flatten();
    const ScalarFunction f = [&](const Vector& v) {
      AutoencoderModel probe = model;
      probe.params = model.params.unflatten(v);
      return reconstruction_loss(probe, batch);
    };
    worst = std::max(worst, finite_difference_check(f, flat, analytic, 1e-5).max_relative);
    const Vector numeric = central_difference(f, flat, 1e-5);
    for (Eigen::Index k = 0; k < flat.size(); ++k) {
      const double scale = std::max(std::abs(analytic[k]), std::abs(numeric[k]));
      if (scale > 0.0) worst_unfloored = std::max(worst_unfloored, std::abs(analytic[k] - numeric[k]) / scale);
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 60.0,
          "max rel err " + fmt(worst, 3) + " (unfloored " + fmt(worst_unfloored, 3) + "), " +
              fmt(secs, 3) + " s"};
}

Verdict ac2_dataset1() {
  std::vector<double> gap, both;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const Silhouettes s = silhouettes(benchmark(1, seed));
    gap.push_back(s.memory - s.hidden);
    both.push_back(s.both);
    detail += "seed " + std::to_string(seed) + ": h " + fmt(s.hidden) + " c " + fmt(s.memory) + " both " +
              fmt(s.both) + "; ";
  }
  const double g = median(gap);
  const double b = median(both);
  detail += "median c-h " + fmt(g) + ", median both " + fmt(b);
  return {g >= 0.2 && b >= 0.3, detail};
}

Verdict ac3_dataset2() {
  std::vector<double> h, c, b;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const Silhouettes s = silhouettes(benchmark(2, seed));
    h.push_back(s.hidden);
    c.push_back(s.memory);
    b.push_back(s.both);
    detail += "seed " + std::to_string(seed) + ": h " + fmt(s.hidden) + " c " + fmt(s.memory) + " both " +
              fmt(s.both) + "; ";
  }
  const double mh = median(h), mc = median(c), mb = median(b);
  detail += "medians h " + fmt(mh) + " c " + fmt(mc) + " both " + fmt(mb);
  return {mh >= 0.45 && mc >= 0.35 && mb >= 0.35, detail};
}

Verdict ac4_dataset3_geometry() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const BenchmarkRun& run = benchmark(3, seed);
    std::vector<Vector> memory;
    for (const auto& s : run.data) memory.push_back(encode(run.model, s).memory);
    Vector centroid = Vector::Zero(memory.front().size());
    for (const auto& m : memory) centroid += m;
    centroid /= static_cast<double>(memory.size());
    std::map<std::string, std::pair<double, int>> by_label;
    for (std::size_t i = 0; i < memory.size(); ++i) {
      auto& acc = by_label[*run.data[i].label];
      acc.first += (memory[i] - centroid).norm();
      acc.second += 1;
    }
    const double d1 = by_label["1"].first / by_label["1"].second;
    const double d4 = by_label["4"].first / by_label["4"].second;
    wins += d4 > d1;
    detail += "seed " + std::to_string(seed) + ": c1 " + fmt(d1) + " c4 " + fmt(d4) + "; ";
  }
  detail += std::to_string(wins) + "/3 seeds";
  return {wins >= 2, detail};
}

Verdict ac5_variance() {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const BenchmarkRun& run = benchmark(3, seed);
    std::vector<std::vector<double>> originals, recs;
    for (const auto& s : run.data) {
      originals.push_back(s.values);
      recs.push_back(reconstruct(run.model, s));
    }
    const TTestResult r = variance_reduction_test(originals, recs);
    pass = pass && r.p_value < 0.01;
    detail += "seed " + std::to_string(seed) + ": t " + fmt(r.t) + " p " + fmt(r.p_value, 3) + "; ";
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Verdict ac6_silhouette_oracle() {
  std::mt19937_64 rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 50)(rng);
    const int k = std::min(std::uniform_int_distribution<int>(2, 5)(rng), n);
    const int dim = std::uniform_int_distribution<int>(1, 8)(rng);
    std::vector<Vector> points;
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) {
      points.push_back(tlstm::testing::random_matrix(rng, dim, 1, -4, 4).col(0));
      labels.push_back(std::to_string(i < k ? i : std::uniform_int_distribution<int>(0, k - 1)(rng)));
    }
    const SilhouetteResult r = silhouette(points, labels);
    const auto oracle = tlstm::testing::brute_force_silhouette(points, labels);
    double mean = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      worst = std::max(worst, std::abs(r.per_point[i] - oracle[i]));
      mean += oracle[i];
    }
    worst = std::max(worst, std::abs(r.average - mean / n));
  }
  return {worst <= 1e-12, "max abs diff " + fmt(worst, 3) + " over 100 instances"};
}

Verdict ac7_overall_rmse() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 12)(rng);
    const double magnitude = std::pow(10.0, std::uniform_real_distribution<double>(-3, 3)(rng));
    std::vector<double> folds;
    long double sum_sq = 0.0L;
    for (int i = 0; i < k; ++i) {
      folds.push_back(std::uniform_real_distribution<double>(0.0, magnitude)(rng));
      sum_sq += static_cast<long double>(folds.back()) * folds.back();
    }
    const double expected = static_cast<double>(std::sqrt(sum_sq / k));
    const double got = overall_rmse(folds);
    worst = std::max(worst, std::abs(got - expected) / std::max(1.0, expected));
  }
  return {worst <= 1e-12, "max rel diff " + fmt(worst, 3) + " over 1000 cases"};
}

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tlstm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tlstm_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string normalize_arg() { return kNormalization == NormalizationKind::kZScore ? "zscore" : "identity"; }

Verdict ac8_cross_validation() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> folds_csv, overall_csv, chosen;
  for (int round = 0; round < 2; ++round) {
    const fs::path dir = fresh_dir("cv" + std::to_string(round));
    const std::string data = (dir / "d1.jsonl").string();
    if (cli({"synth", "--dataset", "1", "--seed", "11", "--out", data}).code != 0) return {false, "synth failed"};
    const CliRun r = cli({"cv", "--data", data, "--dims", "2,4,8", "--folds", "4", "--epochs", "300",
                          "--seed", "11", "--lr", fmt(kLearningRate, 17), "--normalize", normalize_arg(),
                          "--out", (dir / "cv.csv").string(), "--overall-out", (dir / "overall.csv").string()});
    if (r.code != 0) return {false, "cv exited " + std::to_string(r.code) + ": " + r.err};
    folds_csv.push_back(read_text_file(dir / "cv.csv"));
    overall_csv.push_back(read_text_file(dir / "overall.csv"));
    chosen.push_back(r.out.substr(r.out.rfind("chosen dimension")));
    fs::remove_all(dir);
  }
  const CsvTable table = parse_csv(folds_csv[0]);
  const bool shape = table.header == std::vector<std::string>{"dim", "fold", "rmse"} && table.rows.size() == 12;
  const bool same = folds_csv[0] == folds_csv[1] && overall_csv[0] == overall_csv[1] && chosen[0] == chosen[1];
  std::string last = chosen[0];
  last.erase(std::remove(last.begin(), last.end(), '\n'), last.end());
  std::string overall = overall_csv[0].substr(overall_csv[0].find('\n') + 1);
  std::replace(overall.begin(), overall.end(), '\n', ' ');
  return {shape && same, last + "; overall " + overall + "; identical runs " + (same ? "yes" : "no") + ", " +
                             fmt(seconds_since(t0), 3) + " s"};
}

Verdict ac9_generator() {
  GeneratorConfig gc;
  std::mt19937_64 rng(9);
  double length_sum = 0.0, gap_sum = 0.0;
  std::size_t gap_count = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> grid = sample_time_grid(gc, rng);
    length_sum += static_cast<double>(grid.size());
    for (std::size_t t = 1; t < grid.size(); ++t) gap_sum += grid[t] - grid[t - 1];
    gap_count += grid.size() - 1;
  }
  const double mean_len = length_sum / 10000.0;
  const double mean_gap = gap_sum / static_cast<double>(gap_count);

  gc.seed = 9;
  const Dataset d3 = generate(3, gc);
  std::map<std::string, std::vector<double>> by_label;
  for (const auto& s : d3) by_label[*s.label].insert(by_label[*s.label].end(), s.values.begin(), s.values.end());
  std::vector<double> sds;
  for (const auto& [label, values] : by_label) sds.push_back(std::sqrt(sample_variance(values)));
  bool increasing = true;
  for (std::size_t i = 1; i < sds.size(); ++i) increasing = increasing && sds[i] > sds[i - 1];
  const bool pass = mean_len >= 21 && mean_len <= 24 && mean_gap >= 49 && mean_gap <= 51 && increasing;
  return {pass, "mean length " + fmt(mean_len) + ", mean gap " + fmt(mean_gap) + ", dataset 3 sd " + fmt(sds[0]) +
                    " < " + fmt(sds[1]) + " < " + fmt(sds[2]) + " < " + fmt(sds[3])};
}

Verdict ac10_determinism() {
  std::vector<std::map<std::string, std::string>> outputs;
  for (int round = 0; round < 2; ++round) {
    const fs::path dir = fresh_dir("pipeline" + std::to_string(round));
    auto p = [&](const char* name) { return (dir / name).string(); };
    const std::vector<std::vector<std::string>> steps = {
        {"synth", "--dataset", "1", "--seed", "5", "--out", p("d.jsonl")},
        {"train", "--data", p("d.jsonl"), "--hidden-dim", "2", "--epochs", "200", "--seed", "5", "--lr",
         fmt(kLearningRate, 17), "--normalize", normalize_arg(), "--out", p("m.json"), "--loss-curve", p("loss.csv")},
        {"embed", "--model", p("m.json"), "--data", p("d.jsonl"), "--part", "both", "--out", p("emb.csv")},
        {"silhouette", "--embeddings", p("emb.csv"), "--data", p("d.jsonl"), "--out", p("sil.csv")}};
    for (const auto& step : steps) {
      const CliRun r = cli(step);
      if (r.code != 0) return {false, step.front() + " exited " + std::to_string(r.code) + ": " + r.err};
    }
    std::map<std::string, std::string> files;
    for (const char* name : {"d.jsonl", "m.json", "loss.csv", "emb.csv", "sil.csv"}) {
      files[name] = read_text_file(dir / name);
    }
    outputs.push_back(std::move(files));
    fs::remove_all(dir);
  }
  std::string differing;
  for (const auto& [name, bytes] : outputs[0]) {
    if (outputs[1].at(name) != bytes) differing += " " + name;
  }
  return {differing.empty(), differing.empty() ? "5 files byte-identical across two runs" : "differ:" + differing};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::pair<std::string, std::function<Verdict()>>>> criteria = {
      {"AC1", {"gradient check vs central differences", ac1_gradients}},
      {"AC2", {"dataset 1: memory beats hidden", ac2_dataset1}},
      {"AC3", {"dataset 2: all parts cluster, hidden at least 0.45", ac3_dataset2}},
      {"AC4", {"dataset 3: noisy cluster on the periphery", ac4_dataset3_geometry}},
      {"AC5", {"dataset 3: reconstruction variance reduction", ac5_variance}},
      {"AC6", {"silhouette vs brute-force oracle", ac6_silhouette_oracle}},
      {"AC7", {"overall RMSE quadratic mean", ac7_overall_rmse}},
      {"AC8", {"4-fold CV determinism", ac8_cross_validation}},
      {"AC9", {"generator statistics", ac9_generator}},
      {"AC10", {"pipeline byte determinism", ac10_determinism}},
  };
  const std::set<std::string> only(argv + 1, argv + argc);

  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto& [title, check] = entry;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << " " << title << ": " << v.detail << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
