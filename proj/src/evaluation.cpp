#include "tlstm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <thread>

namespace tlstm {

// ---- silhouette ----------------------------------------------------------

SilhouetteResult silhouette(std::span<const Vector> points, std::span<const std::string> labels) {
  if (points.size() != labels.size()) {
    throw ContractError("silhouette: " + std::to_string(points.size()) + " points but " +
                        std::to_string(labels.size()) + " labels");
  }
  std::map<std::string, std::size_t> cluster_of;
  std::vector<std::size_t> assignment(points.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    assignment[i] = cluster_of.try_emplace(labels[i], cluster_of.size()).first->second;
  }
  if (cluster_of.size() < 2) throw ContractError("silhouette: need at least two distinct labels");
  const Eigen::Index dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw DimensionError("silhouette: vectors differ in length");
  }

  const std::size_t k = cluster_of.size();
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t c : assignment) ++sizes[c];

  SilhouetteResult result;
  result.per_point.resize(points.size());
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j != i) sums[assignment[j]] += (points[i] - points[j]).norm();
    }
    const std::size_t own = assignment[i];
    if (sizes[own] == 1) {
      result.per_point[i] = 0.0;
      continue;
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    result.per_point[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  result.average = std::accumulate(result.per_point.begin(), result.per_point.end(), 0.0) /
                   static_cast<double>(points.size());
  return result;
}

// ---- cross-validation ----------------------------------------------------

double overall_rmse(std::span<const double> fold_rmses) {
  if (fold_rmses.empty()) throw ContractError("overall RMSE: no folds");
  double sum = 0.0;
  for (double r : fold_rmses) {
    if (!(r >= 0.0)) throw ContractError("overall RMSE: fold RMSE must be non-negative");
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(fold_rmses.size()));
}

std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds,
                                                     std::uint64_t seed) {
  if (folds < 2) throw ContractError("cross-validation: need at least 2 folds");
  if (n < folds) {
    throw ContractError("cross-validation: " + std::to_string(n) + " profiles cannot fill " +
                        std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> parts(folds);
  for (std::size_t i = 0; i < n; ++i) parts[i % folds].push_back(order[i]);
  for (auto& part : parts) std::sort(part.begin(), part.end());
  return parts;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t fold, std::uint64_t dim) {
  // splitmix64 finalizer over a simple combination
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ fold) ^ dim);
}

double validation_rmse(const AutoencoderModel& model, std::span<const IrregularSeries> data) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : data) {
    const std::vector<double> rec = reconstruct(model, s);
    for (std::size_t t = 0; t < rec.size(); ++t) {
      const double err = rec[t] - s.values[t];
      sum += err * err;
    }
    count += rec.size();
  }
  if (count == 0) throw ContractError("validation RMSE: no observations");
  return std::sqrt(sum / static_cast<double>(count));
}

Eigen::Index choose_dimension(std::span<const CvRow> rows) {
  if (rows.empty()) throw ContractError("cross-validation: no candidate dimensions");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) best = std::min(best, r.overall);
  Eigen::Index chosen = std::numeric_limits<Eigen::Index>::max();
  for (const auto& r : rows) {
    if (r.overall <= best * 1.01) chosen = std::min(chosen, r.hidden_dim);
  }
  return chosen;
}

CvReport kfold_cv(std::span<const IrregularSeries> data, const CvConfig& config) {
  if (config.dims.empty()) throw ContractError("cross-validation: no candidate dimensions");
  for (Eigen::Index d : config.dims) {
    if (d < 1) throw ContractError("cross-validation: hidden dimensions must be >= 1");
  }
  config.train.validate();
  const auto parts = fold_partition(data.size(), config.folds, config.train.seed);

  struct Cell {
    std::size_t dim_index;
    std::size_t fold;
  };
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < config.dims.size(); ++d) {
    for (std::size_t f = 0; f < config.folds; ++f) cells.push_back({d, f});
  }
  std::vector<double> rmse(cells.size(), 0.0);
  std::vector<std::exception_ptr> errors(cells.size());

  auto run_cell = [&](std::size_t c) {
    const Cell cell = cells[c];
    const Eigen::Index dim = config.dims[cell.dim_index];
    try {
      std::vector<IrregularSeries> train_set;
      std::vector<IrregularSeries> held_out;
      for (std::size_t f = 0; f < config.folds; ++f) {
        for (std::size_t i : parts[f]) (f == cell.fold ? held_out : train_set).push_back(data[i]);
      }
      ModelDims dims = config.model;
      dims.hidden_dim = dim;
      TrainConfig tc = config.train;
      tc.seed = derive_seed(config.train.seed, cell.fold, static_cast<std::uint64_t>(dim));
      const TrainResult trained = train(train_set, dims, tc);
      rmse[c] = validation_rmse(trained.model, held_out);
    } catch (const NumericError& e) {
      errors[c] = std::make_exception_ptr(NumericError(
          "cross-validation: dim " + std::to_string(dim) + ", fold " +
          std::to_string(cell.fold + 1) + ": " + e.what()));
    } catch (const ContractError& e) {
      errors[c] = std::make_exception_ptr(ContractError(
          "cross-validation: dim " + std::to_string(dim) + ", fold " +
          std::to_string(cell.fold + 1) + ": " + e.what()));
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.threads, cells.size()));
  if (workers == 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < cells.size(); c += workers) run_cell(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CvReport report;
  for (std::size_t d = 0; d < config.dims.size(); ++d) {
    CvRow row;
    row.hidden_dim = config.dims[d];
    for (std::size_t f = 0; f < config.folds; ++f) row.fold_rmse.push_back(rmse[d * config.folds + f]);
    row.overall = overall_rmse(row.fold_rmse);
    report.rows.push_back(std::move(row));
  }
  report.chosen_dim = choose_dimension(report.rows);
  return report;
}

// ---- reconstruction variance -----------------------------------------------

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ContractError("incomplete beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ContractError("incomplete beta: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw ContractError("t distribution: degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw ContractError("sample variance: need at least two values");
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

TTestResult paired_t_test(std::span<const double> differences) {
  const std::size_t n = differences.size();
  if (n < 2) throw ContractError("t-test: need at least two pairs");
  const double mean =
      std::accumulate(differences.begin(), differences.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double d : differences) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult r;
  r.n = n;
  if (sd == 0.0) {
    if (mean == 0.0) return r;  // t = 0, p = 0.5
    r.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
    r.p_value = mean > 0.0 ? 0.0 : 1.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const double dof = static_cast<double>(n - 1);
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, dof / (dof + r.t * r.t));  // P(T > |t|)
  r.p_value = r.t > 0.0 ? tail : 1.0 - tail;
  return r;
}

TTestResult variance_reduction_test(std::span<const std::vector<double>> originals,
                                    std::span<const std::vector<double>> reconstructions) {
  if (originals.size() != reconstructions.size()) {
    throw ContractError("variance test: " + std::to_string(originals.size()) + " originals but " +
                        std::to_string(reconstructions.size()) + " reconstructions");
  }
  std::vector<double> differences;
  differences.reserve(originals.size());
  for (std::size_t i = 0; i < originals.size(); ++i) {
    if (originals[i].size() != reconstructions[i].size()) {
      throw ContractError("variance test: pair " + std::to_string(i) + " differs in length");
    }
    if (originals[i].size() < 2) {
      throw ContractError("variance test: pair " + std::to_string(i) + " has fewer than two values");
    }
    differences.push_back(sample_variance(originals[i]) - sample_variance(reconstructions[i]));
  }
  return paired_t_test(differences);
}

// ---- outliers --------------------------------------------------------------

OutlierReport extreme_dimension_outliers(std::span<const Vector> embeddings, std::size_t top_k) {
  if (embeddings.size() < 2) throw ContractError("outliers: need at least two embeddings");
  const Eigen::Index dims = embeddings.front().size();
  for (const auto& e : embeddings) {
    if (e.size() != dims) throw DimensionError("outliers: embeddings differ in length");
  }
  const std::size_t n = embeddings.size();
  constexpr double kTieTolerance = 1e-9;

  OutlierReport report;
  report.extreme_per_dimension.resize(static_cast<std::size_t>(dims));
  report.extreme_dimensions.resize(n);
  for (Eigen::Index d = 0; d < dims; ++d) {
    double mean = 0.0;
    for (const auto& e : embeddings) mean += e[d];
    mean /= static_cast<double>(n);

    std::size_t best = 0;
    double best_dist = -1.0;
    double runner_up = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = std::abs(embeddings[i][d] - mean);
      if (dist > best_dist) {
        runner_up = best_dist;
        best_dist = dist;
        best = i;
      } else if (dist > runner_up) {
        runner_up = dist;
      }
    }
    const bool unique = best_dist > 0.0 && runner_up < best_dist * (1.0 - kTieTolerance);
    if (unique) {
      report.extreme_per_dimension[static_cast<std::size_t>(d)] = best;
      report.extreme_dimensions[best].push_back(static_cast<std::size_t>(d));
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.extreme_dimensions[a].size() > report.extreme_dimensions[b].size();
  });
  order.resize(std::min(top_k, n));
  report.ranking = std::move(order);
  return report;
}

}  // namespace tlstm
