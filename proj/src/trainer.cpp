#include "tlstm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

namespace tlstm {

void TrainConfig::validate() const {
  if (epochs < 1) throw ContractError("train: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ContractError("train: learning rate must be positive");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw ContractError("train: Adam betas must lie in (0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ContractError("train: Adam epsilon must be positive");
  if (plateau_patience && *plateau_patience == 0) {
    throw ContractError("train: plateau patience must be >= 1 when set");
  }
}

std::vector<LengthBucket> bucket_by_length(std::span<const IrregularSeries> data,
                                           std::size_t max_batch_size) {
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < data.size(); ++i) by_length[data[i].size()].push_back(i);

  std::vector<LengthBucket> out;
  for (auto& [length, members] : by_length) {
    const std::size_t chunk = max_batch_size == 0 ? members.size() : max_batch_size;
    for (std::size_t start = 0; start < members.size(); start += chunk) {
      const std::size_t end = std::min(members.size(), start + chunk);
      out.push_back({length, {members.begin() + static_cast<std::ptrdiff_t>(start),
                              members.begin() + static_cast<std::ptrdiff_t>(end)}});
    }
  }
  return out;
}

AutoencoderModel init_params(const ModelDims& dims, std::uint64_t seed) {
  if (dims.hidden_dim < 1) throw ContractError("init: hidden_dim must be >= 1");
  AutoencoderModel model;
  model.params = AutoencoderParams::zeros(dims.input_dim, dims.hidden_dim);
  model.gap_divisor = dims.gap_divisor;
  model.elapse = dims.elapse;
  model.seed = seed;

  std::mt19937_64 rng(seed);
  model.params.for_each([&](const std::string& name, Matrix& m) {
    const std::string base = name.substr(name.rfind('.') + 1);
    if (base.starts_with("b_")) return;
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
    }
  });
  return model;
}

AdamState AdamState::zeros_like(const AutoencoderParams& params) {
  AdamState state{params, params};
  state.first_moment.for_each([](const std::string&, Matrix& m) { m.setZero(); });
  state.second_moment.for_each([](const std::string&, Matrix& m) { m.setZero(); });
  return state;
}

void adam_step(AutoencoderParams& params, const AutoencoderParams& grads, AdamState& state,
               std::size_t step_index, const TrainConfig& config) {
  if (step_index < 1) throw ContractError("adam: step index must be >= 1");

  std::vector<const Matrix*> g;
  grads.for_each([&](const std::string& name, const Matrix& m) {
    if (!m.allFinite()) throw NumericError("adam: non-finite gradient for " + name);
    g.push_back(&m);
  });
  std::vector<Matrix*> m1;
  std::vector<Matrix*> m2;
  state.first_moment.for_each([&](const std::string&, Matrix& m) { m1.push_back(&m); });
  state.second_moment.for_each([&](const std::string&, Matrix& m) { m2.push_back(&m); });

  const double t = static_cast<double>(step_index);
  const double correction1 = 1.0 - std::pow(config.adam_beta1, t);
  const double correction2 = 1.0 - std::pow(config.adam_beta2, t);

  std::size_t k = 0;
  params.for_each([&](const std::string& name, Matrix& theta) {
    const Matrix& grad = *g.at(k);
    if (grad.rows() != theta.rows() || grad.cols() != theta.cols() ||
        m1.at(k)->rows() != theta.rows() || m1.at(k)->cols() != theta.cols()) {
      throw DimensionError("adam: gradient shape mismatch for " + name);
    }
    Matrix& first = *m1[k];
    Matrix& second = *m2[k];
    first = config.adam_beta1 * first + (1.0 - config.adam_beta1) * grad;
    second = config.adam_beta2 * second + (1.0 - config.adam_beta2) * grad.cwiseAbs2();
    theta.array() -= config.learning_rate * (first.array() / correction1) /
                     ((second.array() / correction2).sqrt() + config.adam_epsilon);
    ++k;
  });
}

std::vector<std::size_t> epoch_order(std::size_t chunks, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(chunks);
  for (std::size_t i = 0; i < chunks; ++i) order[i] = i;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

TrainResult train(std::span<const IrregularSeries> data, const ModelDims& dims,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (data.empty()) throw ContractError("train: empty dataset");
  for (const auto& s : data) s.validate();

  TrainResult result;
  result.model = init_params(dims, config.seed);
  if (dims.normalization == NormalizationKind::kZScore) {
    result.model.normalization = Normalization::zscore(data);
  }

  const std::vector<LengthBucket> chunks = bucket_by_length(data, config.max_batch_size);
  std::vector<std::vector<IrregularSeries>> batches;
  batches.reserve(chunks.size());
  for (const auto& chunk : chunks) {
    std::vector<IrregularSeries> batch;
    for (std::size_t i : chunk.members) batch.push_back(data[i]);
    batches.push_back(std::move(batch));
  }

  AdamState state = AdamState::zeros_like(result.model.params);
  std::size_t step_index = 0;
  std::size_t flat_epochs = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double weighted = 0.0;
    double weight = 0.0;
    const std::vector<std::size_t> order = epoch_order(batches.size(), config.seed, epoch);
    for (std::size_t position = 0; position < order.size(); ++position) {
      const auto& batch = batches[order[position]];
      try {
        const LossGradient lg = loss_and_gradient(result.model, batch);
        if (!std::isfinite(lg.loss)) throw NumericError("non-finite loss");
        adam_step(result.model.params, lg.gradient, state, ++step_index, config);
        const double n = static_cast<double>(batch.size() * batch.front().size());
        weighted += lg.loss * n;
        weight += n;
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(position + 1) + " (length " +
                           std::to_string(batch.front().size()) + "): " + e.what());
      }
    }
    const double mean = weighted / weight;
    if (!std::isfinite(mean)) {
      throw NumericError("train: epoch " + std::to_string(epoch + 1) + " loss is not finite");
    }
    if (!result.loss_curve.empty() && result.loss_curve.back() - mean < 1e-6) {
      ++flat_epochs;
    } else {
      flat_epochs = 0;
    }
    result.loss_curve.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
    if (config.plateau_patience && flat_epochs >= *config.plateau_patience) {
      result.stopped_early = epoch + 1 < config.epochs;
      break;
    }
  }
  return result;
}

}  // namespace tlstm
