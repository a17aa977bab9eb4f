#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tlstm/autoencoder.hpp"

namespace tlstm {

struct TrainConfig {
  std::size_t epochs = 1;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t max_batch_size = 50;  // 0 = unlimited
  std::uint64_t seed = 0;
  // Stop once the epoch loss has improved by less than 1e-6 for this many
  // consecutive epochs.
  std::optional<std::size_t> plateau_patience;

  void validate() const;
};

struct ModelDims {
  Eigen::Index hidden_dim = 2;
  Eigen::Index input_dim = 1;
  double gap_divisor = 1.0;
  ElapseKind elapse = ElapseKind::kLogarithmic;
  NormalizationKind normalization = NormalizationKind::kIdentity;
};

// Indices of equal-length series forming one mini-batch.
struct LengthBucket {
  std::size_t length = 0;
  std::vector<std::size_t> members;
};

// Groups series by length (ascending), members in dataset order. Groups
// larger than max_batch_size are split into consecutive chunks; 0 disables
// splitting.
std::vector<LengthBucket> bucket_by_length(std::span<const IrregularSeries> data,
                                           std::size_t max_batch_size = 0);

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
// Normalization is left at identity.
AutoencoderModel init_params(const ModelDims& dims, std::uint64_t seed);

struct AdamState {
  AutoencoderParams first_moment;
  AutoencoderParams second_moment;

  static AdamState zeros_like(const AutoencoderParams& params);
};

// One bias-corrected Adam update; `step_index` counts from 1.
void adam_step(AutoencoderParams& params, const AutoencoderParams& grads, AdamState& state,
               std::size_t step_index, const TrainConfig& config);

// Visiting order of `chunks` batches in `epoch`; a pure function of its inputs.
std::vector<std::size_t> epoch_order(std::size_t chunks, std::uint64_t seed, std::size_t epoch);

struct TrainResult {
  AutoencoderModel model;
  std::vector<double> loss_curve;  // mean loss per epoch
  bool stopped_early = false;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

TrainResult train(std::span<const IrregularSeries> data, const ModelDims& dims,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace tlstm
