#include "tlstm/autoencoder.hpp"

#include <cmath>
#include <string>

namespace tlstm {

Normalization Normalization::zscore(std::span<const IrregularSeries> data) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : data) {
    for (double v : s.values) sum += v;
    count += s.values.size();
  }
  if (count == 0) throw ContractError("z-score normalization: no observations");
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (const auto& s : data) {
    for (double v : s.values) ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(count));
  return {mean, sd > 0.0 ? sd : 1.0};
}

NormalizationKind parse_normalization(std::string_view name) {
  if (name == "identity") return NormalizationKind::kIdentity;
  if (name == "zscore") return NormalizationKind::kZScore;
  throw ContractError("unknown normalization '" + std::string(name) + "' (expected identity|zscore)");
}

AutoencoderParams AutoencoderParams::zeros(Eigen::Index input_dim, Eigen::Index hidden_dim) {
  if (hidden_dim < 1 || input_dim < 1) throw ContractError("autoencoder: dimensions must be >= 1");
  AutoencoderParams p;
  p.encoder = TlstmParams::zeros(input_dim, hidden_dim);
  p.decoder = TlstmParams::zeros(input_dim, hidden_dim);
  p.w_out = Matrix::Zero(input_dim, hidden_dim);
  p.b_out = Matrix::Zero(input_dim, 1);
  return p;
}

Eigen::Index AutoencoderParams::parameter_count() const {
  Eigen::Index n = 0;
  for_each([&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

Vector AutoencoderParams::flatten() const {
  Vector flat(parameter_count());
  Eigen::Index offset = 0;
  for_each([&](const std::string&, const Matrix& m) {
    flat.segment(offset, m.size()) = m.reshaped();
    offset += m.size();
  });
  return flat;
}

AutoencoderParams AutoencoderParams::unflatten(const Vector& flat) const {
  if (flat.size() != parameter_count()) {
    throw DimensionError("unflatten: expected " + std::to_string(parameter_count()) +
                         " entries, got " + std::to_string(flat.size()));
  }
  AutoencoderParams out = *this;
  Eigen::Index offset = 0;
  out.for_each([&](const std::string&, Matrix& m) {
    m.reshaped() = flat.segment(offset, m.size());
    offset += m.size();
  });
  return out;
}

void AutoencoderParams::validate() const {
  encoder.validate();
  decoder.validate();
  if (decoder.hidden_dim() != encoder.hidden_dim() || decoder.input_dim() != encoder.input_dim()) {
    throw DimensionError("autoencoder: encoder and decoder dimensions differ");
  }
  if (w_out.rows() != input_dim() || w_out.cols() != hidden_dim()) {
    throw DimensionError("autoencoder: W_out has shape " + shape_string(w_out.rows(), w_out.cols()));
  }
  if (b_out.rows() != input_dim() || b_out.cols() != 1) {
    throw DimensionError("autoencoder: b_out has shape " + shape_string(b_out.rows(), b_out.cols()));
  }
  require_finite(w_out, "W_out");
  require_finite(b_out, "b_out");
}

void AutoencoderModel::validate() const {
  params.validate();
  if (input_dim() != 1) throw ContractError("autoencoder: only univariate input is supported");
  if (!(normalization.scale != 0.0) || !std::isfinite(normalization.scale) ||
      !std::isfinite(normalization.shift)) {
    throw ContractError("autoencoder: normalization scale must be finite and non-zero");
  }
  if (!(gap_divisor > 0.0) || !std::isfinite(gap_divisor)) {
    throw ContractError("autoencoder: gap divisor must be positive");
  }
}

EmbeddingPart parse_embedding_part(std::string_view name) {
  if (name == "hidden") return EmbeddingPart::kHidden;
  if (name == "memory") return EmbeddingPart::kMemory;
  if (name == "both") return EmbeddingPart::kBoth;
  throw ContractError("unknown embedding part '" + std::string(name) + "' (expected hidden|memory|both)");
}

Vector Embedding::part(EmbeddingPart which) const {
  switch (which) {
    case EmbeddingPart::kHidden: return hidden;
    case EmbeddingPart::kMemory: return memory;
    case EmbeddingPart::kBoth: break;
  }
  Vector both(hidden.size() + memory.size());
  both << hidden, memory;
  return both;
}

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

void require_series(const AutoencoderModel& model, const IrregularSeries& series) {
  if (series.times.empty()) throw ContractError("series '" + series.id + "' is empty");
  if (model.input_dim() != 1) throw ContractError("autoencoder: only univariate input is supported");
}

// Normalized predictions, reverse chronological.
std::vector<double> decode_normalized(const AutoencoderModel& model, const IrregularSeries& series,
                                      const Embedding& embedding, DecodeMode mode) {
  require_series(model, series);
  const Eigen::Index hid = model.hidden_dim();
  if (embedding.hidden.size() != hid || embedding.memory.size() != hid) {
    throw DimensionError("decode: embedding has " + std::to_string(embedding.hidden.size()) + "+" +
                         std::to_string(embedding.memory.size()) + " entries for hidden_dim " +
                         std::to_string(hid));
  }
  const auto& p = model.params;
  const std::size_t length = series.size();

  CellState state{Matrix(embedding.hidden), Matrix(embedding.memory)};
  Matrix x = Matrix::Zero(1, 1);
  Matrix gap = scalar(model.gap_factor(0.0));
  std::vector<double> out(length);
  for (std::size_t k = 0; k < length; ++k) {
    state = step(p.decoder, state, x, gap);
    const Matrix projected = p.w_out * state.h;
    const double pred = projected(0, 0) + p.b_out(0, 0);
    out[k] = pred;

    const std::size_t target = length - 1 - k;
    x(0, 0) = mode == DecodeMode::kTeacherForced
                  ? model.normalization.normalize(series.values[target])
                  : pred;
    gap(0, 0) = model.gap_factor(series.gap(target));
  }
  return out;
}

}  // namespace

Embedding encode(const AutoencoderModel& model, const IrregularSeries& series) {
  require_series(model, series);
  const auto& p = model.params;
  CellState state = CellState::zeros(model.hidden_dim());
  Matrix x(1, 1);
  Matrix gap(1, 1);
  for (std::size_t t = 0; t < series.size(); ++t) {
    x(0, 0) = model.normalization.normalize(series.values[t]);
    gap(0, 0) = model.gap_factor(series.gap(t));
    state = step(p.encoder, state, x, gap);
  }
  return {series.id, state.h.col(0), state.c.col(0)};
}

std::vector<double> decode(const AutoencoderModel& model, const IrregularSeries& series,
                           const Embedding& embedding, DecodeMode mode) {
  std::vector<double> out = decode_normalized(model, series, embedding, mode);
  for (double& v : out) v = model.normalization.denormalize(v);
  return out;
}

std::vector<double> reconstruct(const AutoencoderModel& model, const IrregularSeries& series,
                                DecodeMode mode) {
  std::vector<double> reversed = decode(model, series, encode(model, series), mode);
  return {reversed.rbegin(), reversed.rend()};
}

namespace {

std::size_t common_length(std::span<const IrregularSeries> batch) {
  if (batch.empty()) throw ContractError("reconstruction loss: empty batch");
  const std::size_t length = batch.front().size();
  for (const auto& s : batch) {
    if (s.size() != length) {
      throw ContractError("reconstruction loss: batch mixes lengths " + std::to_string(length) +
                          " and " + std::to_string(s.size()) + " (series '" + s.id + "')");
    }
  }
  if (length == 0) throw ContractError("reconstruction loss: empty series in batch");
  return length;
}

}  // namespace

double reconstruction_loss(const AutoencoderModel& model, std::span<const IrregularSeries> batch) {
  const std::size_t length = common_length(batch);
  double total = 0.0;
  for (const auto& s : batch) {
    const std::vector<double> pred =
        decode_normalized(model, s, encode(model, s), DecodeMode::kTeacherForced);
    for (std::size_t k = 0; k < length; ++k) {
      const double err = pred[k] - model.normalization.normalize(s.values[length - 1 - k]);
      total += err * err;
    }
  }
  const double loss = total / static_cast<double>(batch.size() * length);
  if (!std::isfinite(loss)) throw NumericError("reconstruction loss is not finite");
  return loss;
}

LossGradient loss_and_gradient(const AutoencoderModel& model,
                               std::span<const IrregularSeries> batch) {
  const std::size_t length = common_length(batch);
  for (const auto& s : batch) require_series(model, s);
  const Eigen::Index hid = model.hidden_dim();
  const Eigen::Index width = static_cast<Eigen::Index>(batch.size());
  const auto& p = model.params;

  // Row t: normalized observation t for each batch column; likewise gap factors.
  Matrix observed(static_cast<Eigen::Index>(length), width);
  Matrix gaps(static_cast<Eigen::Index>(length), width);
  for (Eigen::Index b = 0; b < width; ++b) {
    const auto& s = batch[static_cast<std::size_t>(b)];
    for (std::size_t t = 0; t < length; ++t) {
      observed(static_cast<Eigen::Index>(t), b) = model.normalization.normalize(s.values[t]);
      gaps(static_cast<Eigen::Index>(t), b) = model.gap_factor(s.gap(t));
    }
  }
  auto row = [&](const Matrix& m, std::size_t t) -> Matrix {
    return m.row(static_cast<Eigen::Index>(t));
  };
  auto broadcast = [&](const Matrix& r) -> Matrix { return Matrix::Ones(hid, 1) * r; };

  Tape tape;
  const TlstmVars enc = TlstmVars::record(tape, p.encoder);
  const TlstmVars dec = TlstmVars::record(tape, p.decoder);
  const Var w_out = tape.leaf(p.w_out);
  const Var b_out = tape.leaf(p.b_out);

  TapeState state{tape.constant(Matrix::Zero(hid, width)), tape.constant(Matrix::Zero(hid, width))};
  for (std::size_t t = 0; t < length; ++t) {
    state = step_on_tape(tape, enc, state, tape.constant(row(observed, t)),
                         tape.constant(broadcast(row(gaps, t))));
  }

  Var x = tape.constant(Matrix::Zero(1, width));
  Var gap = tape.constant(Matrix::Constant(hid, width, model.gap_factor(0.0)));
  Var total{};
  for (std::size_t k = 0; k < length; ++k) {
    state = step_on_tape(tape, dec, state, x, gap);
    const Var pred = tape.add_column(tape.matmul(w_out, state.h), b_out);
    const std::size_t target = length - 1 - k;
    const Var err = tape.subtract(pred, tape.constant(row(observed, target)));
    const Var sq = tape.sum_squares(err);
    total = k == 0 ? sq : tape.add(total, sq);
    x = tape.constant(row(observed, target));
    gap = tape.constant(broadcast(row(gaps, target)));
  }
  const Var loss = tape.scale(total, 1.0 / static_cast<double>(batch.size() * length));

  const Gradients grads = tape.backward(loss);
  LossGradient out;
  out.loss = tape.value(loss)(0, 0);
  out.gradient = p;
  auto copy = [&](TlstmParams& dst, const TlstmVars& vars) {
    std::vector<Var> handles;
    vars.for_each([&](std::string_view, Var v) { handles.push_back(v); });
    std::size_t i = 0;
    dst.for_each([&](std::string_view, Matrix& m) { m = grads[handles[i++]]; });
  };
  copy(out.gradient.encoder, enc);
  copy(out.gradient.decoder, dec);
  out.gradient.w_out = grads[w_out];
  out.gradient.b_out = grads[b_out];
  return out;
}

}  // namespace tlstm
