#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlstm/matrix.hpp"
#include "tlstm/trainer.hpp"

namespace tlstm {

// ---- silhouette ----------------------------------------------------------

struct SilhouetteResult {
  std::vector<double> per_point;
  double average = 0.0;
};

// Euclidean silhouette against ground-truth labels. Singleton clusters score
// 0, as does any point with max(a, b) == 0.
SilhouetteResult silhouette(std::span<const Vector> points, std::span<const std::string> labels);

// ---- cross-validation ----------------------------------------------------

// Quadratic mean of per-fold RMSEs.
double overall_rmse(std::span<const double> fold_rmses);

// Seeded shuffle of 0..n-1 dealt round-robin into `folds` parts.
std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds,
                                                     std::uint64_t seed);

// Deterministic per-cell seed for (fold, dim).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t fold, std::uint64_t dim);

// Pooled RMSE between de-normalized teacher-forced reconstructions and the
// observations of every series.
double validation_rmse(const AutoencoderModel& model, std::span<const IrregularSeries> data);

struct CvRow {
  Eigen::Index hidden_dim = 0;
  std::vector<double> fold_rmse;
  double overall = 0.0;
};

struct CvReport {
  std::vector<CvRow> rows;
  Eigen::Index chosen_dim = 0;
};

struct CvConfig {
  std::vector<Eigen::Index> dims;
  std::size_t folds = 4;
  ModelDims model;  // hidden_dim is overridden per candidate
  TrainConfig train;  // train.seed is the master seed
  std::size_t threads = 1;
};

// Smallest dimension whose overall RMSE is within 1% of the minimum.
Eigen::Index choose_dimension(std::span<const CvRow> rows);

CvReport kfold_cv(std::span<const IrregularSeries> data, const CvConfig& config);

// ---- reconstruction variance -----------------------------------------------

struct TTestResult {
  double t = 0.0;
  double p_value = 0.5;
  std::size_t n = 0;
};

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);

// Unbiased (n - 1) sample variance; requires at least two values.
double sample_variance(std::span<const double> values);

// One-sided paired t-test of mean(differences) > 0.
TTestResult paired_t_test(std::span<const double> differences);

// Paired test of var(original_i) - var(reconstruction_i) > 0.
TTestResult variance_reduction_test(std::span<const std::vector<double>> originals,
                                    std::span<const std::vector<double>> reconstructions);

// ---- outliers --------------------------------------------------------------

struct OutlierReport {
  // Per dimension, the row farthest from that dimension's mean, if unique.
  std::vector<std::optional<std::size_t>> extreme_per_dimension;
  // Per row, the dimensions where it is the extreme.
  std::vector<std::vector<std::size_t>> extreme_dimensions;
  // Rows ordered by extreme count (descending, ties by row index), cut to top_k.
  std::vector<std::size_t> ranking;

  std::size_t count(std::size_t row) const { return extreme_dimensions.at(row).size(); }
};

OutlierReport extreme_dimension_outliers(std::span<const Vector> embeddings, std::size_t top_k);

}  // namespace tlstm
