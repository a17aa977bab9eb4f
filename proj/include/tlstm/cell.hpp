#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>

#include "tlstm/matrix.hpp"
#include "tlstm/tape.hpp"

namespace tlstm {

// Time-gap discount applied to the short-term part of the carried memory.
enum class ElapseKind {
  kLogarithmic,  // 1 / ln(e + delta)
  kInverse,      // 1 / max(delta, 1)
};

std::string_view elapse_name(ElapseKind kind);
ElapseKind parse_elapse(std::string_view name);

template <typename Scalar>
Scalar elapse(Scalar delta, ElapseKind kind = ElapseKind::kLogarithmic) {
  if (!(delta >= Scalar(0))) throw ContractError("elapse: time gap must be non-negative");
  switch (kind) {
    case ElapseKind::kInverse:
      return Scalar(1) / std::max(delta, Scalar(1));
    case ElapseKind::kLogarithmic:
      break;
  }
  return Scalar(1) / std::log(std::numbers::e_v<Scalar> + delta);
}

// Learnable matrices of one T-LSTM unit. Biases are stored as H x 1 columns.
template <typename Scalar>
struct TlstmParamsT {
  using Mat = MatrixX<Scalar>;

  // memory decomposition
  Mat w_d, b_d;
  // forget / input / candidate / output
  Mat w_f, u_f, b_f;
  Mat w_i, u_i, b_i;
  Mat w_c, u_c, b_c;
  Mat w_o, u_o, b_o;

  static TlstmParamsT zeros(Eigen::Index input_dim, Eigen::Index hidden_dim) {
    TlstmParamsT p;
    p.for_each([&](std::string_view name, Mat& m) {
      const auto [rows, cols] = shape_of(name, input_dim, hidden_dim);
      m = Mat::Zero(rows, cols);
    });
    return p;
  }

  Eigen::Index hidden_dim() const { return w_f.rows(); }
  Eigen::Index input_dim() const { return w_f.cols(); }

  // Expected shape of a parameter by its short name ("W_d", "U_f", "b_o", ...).
  static std::pair<Eigen::Index, Eigen::Index> shape_of(std::string_view name, Eigen::Index input_dim,
                                                        Eigen::Index hidden_dim) {
    if (name == "W_d") return {hidden_dim, hidden_dim};
    if (name.front() == 'W') return {hidden_dim, input_dim};
    if (name.front() == 'U') return {hidden_dim, hidden_dim};
    return {hidden_dim, 1};
  }

  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }

  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  template <typename Self, typename F>
  static void visit(Self& s, F& f) {
    f("W_d", s.w_d); f("b_d", s.b_d);
    f("W_f", s.w_f); f("U_f", s.u_f); f("b_f", s.b_f);
    f("W_i", s.w_i); f("U_i", s.u_i); f("b_i", s.b_i);
    f("W_c", s.w_c); f("U_c", s.u_c); f("b_c", s.b_c);
    f("W_o", s.w_o); f("U_o", s.u_o); f("b_o", s.b_o);
  }

  void validate() const {
    const Eigen::Index in = input_dim();
    const Eigen::Index hid = hidden_dim();
    if (hid < 1 || in < 1) throw DimensionError("T-LSTM parameters: empty dimensions");
    for_each([&](std::string_view name, const Mat& m) {
      const auto [rows, cols] = shape_of(name, in, hid);
      if (m.rows() != rows || m.cols() != cols) {
        throw DimensionError("T-LSTM parameter " + std::string(name) + " has shape " +
                             shape_string(m.rows(), m.cols()) + ", expected " +
                             shape_string(rows, cols));
      }
      require_finite(m, "T-LSTM parameter " + std::string(name));
    });
  }
};

using TlstmParams = TlstmParamsT<double>;

// Hidden and memory state; one column per sequence in a batch.
template <typename Scalar>
struct CellStateT {
  MatrixX<Scalar> h;
  MatrixX<Scalar> c;

  static CellStateT zeros(Eigen::Index hidden_dim, Eigen::Index batch = 1) {
    return {MatrixX<Scalar>::Zero(hidden_dim, batch), MatrixX<Scalar>::Zero(hidden_dim, batch)};
  }
};

using CellState = CellStateT<double>;

// All intermediates of one step, in evaluation order.
template <typename Scalar>
struct StepTrace {
  MatrixX<Scalar> short_term;             // C^S = tanh(W_d C + b_d)
  MatrixX<Scalar> discounted_short_term;  // C^S * g(delta)
  MatrixX<Scalar> long_term;              // C - C^S
  MatrixX<Scalar> adjusted_memory;        // long_term + discounted_short_term
  MatrixX<Scalar> forget, input, candidate, output;
  CellStateT<Scalar> next;
};

namespace detail {

template <typename Scalar>
MatrixX<Scalar> affine(const MatrixX<Scalar>& w, const MatrixX<Scalar>& x, const MatrixX<Scalar>& u,
                       const MatrixX<Scalar>& h, const MatrixX<Scalar>& b) {
  MatrixX<Scalar> wx = w * x;
  MatrixX<Scalar> uh = u * h;
  MatrixX<Scalar> sum = wx + uh;
  return sum.colwise() + b.col(0);
}

}  // namespace detail

// One T-LSTM step for a batch. `x` is input_dim x B, `gap_factor` holds g(delta)
// per column (1 x B), state matrices are H x B.
template <typename Scalar>
StepTrace<Scalar> step_traced(const TlstmParamsT<Scalar>& p, const CellStateT<Scalar>& prev,
                              const std::type_identity_t<MatrixX<Scalar>>& x,
                              const std::type_identity_t<MatrixX<Scalar>>& gap_factor) {
  const Eigen::Index hid = p.hidden_dim();
  const Eigen::Index batch = x.cols();
  if (x.rows() != p.input_dim() || prev.h.rows() != hid || prev.c.rows() != hid ||
      prev.h.cols() != batch || prev.c.cols() != batch || gap_factor.rows() != 1 ||
      gap_factor.cols() != batch) {
    throw DimensionError("T-LSTM step: input " + shape_string(x.rows(), x.cols()) + ", state " +
                         shape_string(prev.h.rows(), prev.h.cols()) + "/" +
                         shape_string(prev.c.rows(), prev.c.cols()) + ", gaps " +
                         shape_string(gap_factor.rows(), gap_factor.cols()) +
                         " do not match hidden_dim " + std::to_string(hid) + ", input_dim " +
                         std::to_string(p.input_dim()));
  }

  StepTrace<Scalar> t;
  MatrixX<Scalar> wc = p.w_d * prev.c;
  MatrixX<Scalar> pre_short = wc.colwise() + p.b_d.col(0);
  t.short_term = pre_short.array().tanh().matrix();
  MatrixX<Scalar> broadcast_gap = MatrixX<Scalar>::Ones(hid, 1) * gap_factor;
  t.discounted_short_term = t.short_term.cwiseProduct(broadcast_gap);
  t.long_term = prev.c - t.short_term;
  t.adjusted_memory = t.long_term + t.discounted_short_term;

  t.forget = sigmoid(detail::affine(p.w_f, x, p.u_f, prev.h, p.b_f));
  t.input = sigmoid(detail::affine(p.w_i, x, p.u_i, prev.h, p.b_i));
  t.candidate = detail::affine(p.w_c, x, p.u_c, prev.h, p.b_c).array().tanh().matrix();
  t.output = sigmoid(detail::affine(p.w_o, x, p.u_o, prev.h, p.b_o));

  MatrixX<Scalar> kept = t.forget.cwiseProduct(t.adjusted_memory);
  MatrixX<Scalar> written = t.input.cwiseProduct(t.candidate);
  t.next.c = kept + written;
  MatrixX<Scalar> squashed = t.next.c.array().tanh().matrix();
  t.next.h = t.output.cwiseProduct(squashed);

  if (!t.next.c.allFinite() || !t.next.h.allFinite()) {
    throw NumericError("T-LSTM step: non-finite state");
  }
  return t;
}

template <typename Scalar>
CellStateT<Scalar> step(const TlstmParamsT<Scalar>& p, const CellStateT<Scalar>& prev,
                        const std::type_identity_t<MatrixX<Scalar>>& x,
                        const std::type_identity_t<MatrixX<Scalar>>& gap_factor) {
  return step_traced(p, prev, x, gap_factor).next;
}

// Single-sequence convenience: raw (already scaled) time gap.
template <typename Scalar>
CellStateT<Scalar> step(const TlstmParamsT<Scalar>& p, const CellStateT<Scalar>& prev,
                        const std::type_identity_t<VectorX<Scalar>>& x, std::type_identity_t<Scalar> delta,
                        ElapseKind kind = ElapseKind::kLogarithmic) {
  const MatrixX<Scalar> gap = MatrixX<Scalar>::Constant(1, 1, elapse(delta, kind));
  return step(p, prev, MatrixX<Scalar>(x), gap);
}

// ---- recorded variant ----------------------------------------------------

struct TlstmVars {
  Var w_d, b_d;
  Var w_f, u_f, b_f;
  Var w_i, u_i, b_i;
  Var w_c, u_c, b_c;
  Var w_o, u_o, b_o;

  // Registers every parameter of `p` as a gradient-carrying leaf.
  static TlstmVars record(Tape& tape, const TlstmParams& p);

  template <typename F>
  void for_each(F&& f) const {
    f("W_d", w_d); f("b_d", b_d);
    f("W_f", w_f); f("U_f", u_f); f("b_f", b_f);
    f("W_i", w_i); f("U_i", u_i); f("b_i", b_i);
    f("W_c", w_c); f("U_c", u_c); f("b_c", b_c);
    f("W_o", w_o); f("U_o", u_o); f("b_o", b_o);
  }
};

struct TapeState {
  Var h;
  Var c;
};

// Same arithmetic as step_traced, recorded on `tape`. `gap_factor` must be an
// H x B node (g(delta) broadcast down the rows).
TapeState step_on_tape(Tape& tape, const TlstmVars& p, TapeState prev, Var x, Var gap_factor);

}  // namespace tlstm
