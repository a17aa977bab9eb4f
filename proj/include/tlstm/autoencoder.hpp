#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tlstm/cell.hpp"
#include "tlstm/series.hpp"

namespace tlstm {

// Affine map applied to observed values before they enter the network:
// normalized = (value - shift) / scale.
struct Normalization {
  double shift = 0.0;
  double scale = 1.0;

  double normalize(double value) const { return (value - shift) / scale; }
  double denormalize(double value) const { return value * scale + shift; }

  static Normalization identity() { return {}; }
  // Mean and population standard deviation over every observation.
  static Normalization zscore(std::span<const IrregularSeries> data);
};

enum class NormalizationKind { kIdentity, kZScore };
NormalizationKind parse_normalization(std::string_view name);

// Every learnable quantity of the encoder-decoder pair.
struct AutoencoderParams {
  TlstmParams encoder;
  TlstmParams decoder;
  Matrix w_out;  // 1 x H
  Matrix b_out;  // 1 x 1

  static AutoencoderParams zeros(Eigen::Index input_dim, Eigen::Index hidden_dim);

  Eigen::Index hidden_dim() const { return encoder.hidden_dim(); }
  Eigen::Index input_dim() const { return encoder.input_dim(); }

  // Visits parameters as ("encoder.W_d", m), ..., ("W_out", m), ("b_out", m).
  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  Eigen::Index parameter_count() const;
  Vector flatten() const;
  // Inverse of flatten(); shapes are taken from *this.
  AutoencoderParams unflatten(const Vector& flat) const;

  void validate() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& s, F& f) {
    s.encoder.for_each([&](std::string_view name, auto& m) { f("encoder." + std::string(name), m); });
    s.decoder.for_each([&](std::string_view name, auto& m) { f("decoder." + std::string(name), m); });
    f(std::string("W_out"), s.w_out);
    f(std::string("b_out"), s.b_out);
  }
};

struct AutoencoderModel {
  AutoencoderParams params;
  Normalization normalization;
  double gap_divisor = 1.0;
  ElapseKind elapse = ElapseKind::kLogarithmic;
  std::uint64_t seed = 0;

  Eigen::Index hidden_dim() const { return params.hidden_dim(); }
  Eigen::Index input_dim() const { return params.input_dim(); }

  // g(delta / gap_divisor) under this model's elapse function.
  double gap_factor(double delta) const { return tlstm::elapse(delta / gap_divisor, elapse); }

  void validate() const;
};

enum class EmbeddingPart { kHidden, kMemory, kBoth };
EmbeddingPart parse_embedding_part(std::string_view name);

struct Embedding {
  std::string id;
  Vector hidden;  // final encoder h
  Vector memory;  // final encoder C

  // Hidden entries followed by memory entries for kBoth.
  Vector part(EmbeddingPart which) const;
};

enum class DecodeMode {
  kTeacherForced,  // ground-truth observations fed back
  kFreeRunning,    // the previous prediction fed back (inference only)
};

Embedding encode(const AutoencoderModel& model, const IrregularSeries& series);

// Reconstructions in reverse chronological order: element k is x_hat for
// original index T-1-k. Values are de-normalized.
std::vector<double> decode(const AutoencoderModel& model, const IrregularSeries& series,
                           const Embedding& embedding,
                           DecodeMode mode = DecodeMode::kTeacherForced);

// encode + decode, returned in chronological order.
std::vector<double> reconstruct(const AutoencoderModel& model, const IrregularSeries& series,
                                DecodeMode mode = DecodeMode::kTeacherForced);

// Mean squared normalized reconstruction error over every (profile, step)
// pair. All series must share one length.
double reconstruction_loss(const AutoencoderModel& model, std::span<const IrregularSeries> batch);

struct LossGradient {
  double loss = 0.0;
  AutoencoderParams gradient;
};

// Same loss as reconstruction_loss, evaluated on a tape as one batched
// unroll, with gradients for every parameter.
LossGradient loss_and_gradient(const AutoencoderModel& model,
                               std::span<const IrregularSeries> batch);

}  // namespace tlstm
