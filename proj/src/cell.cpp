#include "tlstm/cell.hpp"

#include <string>

namespace tlstm {

std::string_view elapse_name(ElapseKind kind) {
  return kind == ElapseKind::kInverse ? "inverse" : "log";
}

ElapseKind parse_elapse(std::string_view name) {
  if (name == "log") return ElapseKind::kLogarithmic;
  if (name == "inverse") return ElapseKind::kInverse;
  throw ContractError("unknown elapse function '" + std::string(name) + "' (expected log|inverse)");
}

TlstmVars TlstmVars::record(Tape& tape, const TlstmParams& p) {
  TlstmVars v;
  v.w_d = tape.leaf(p.w_d);
  v.b_d = tape.leaf(p.b_d);
  v.w_f = tape.leaf(p.w_f);
  v.u_f = tape.leaf(p.u_f);
  v.b_f = tape.leaf(p.b_f);
  v.w_i = tape.leaf(p.w_i);
  v.u_i = tape.leaf(p.u_i);
  v.b_i = tape.leaf(p.b_i);
  v.w_c = tape.leaf(p.w_c);
  v.u_c = tape.leaf(p.u_c);
  v.b_c = tape.leaf(p.b_c);
  v.w_o = tape.leaf(p.w_o);
  v.u_o = tape.leaf(p.u_o);
  v.b_o = tape.leaf(p.b_o);
  return v;
}

namespace {

Var affine(Tape& tape, Var w, Var x, Var u, Var h, Var b) {
  return tape.add_column(tape.add(tape.matmul(w, x), tape.matmul(u, h)), b);
}

}  // namespace

TapeState step_on_tape(Tape& tape, const TlstmVars& p, TapeState prev, Var x, Var gap_factor) {
  const Var short_term = tape.tanh(tape.add_column(tape.matmul(p.w_d, prev.c), p.b_d));
  const Var discounted = tape.hadamard(short_term, gap_factor);
  const Var long_term = tape.subtract(prev.c, short_term);
  const Var adjusted = tape.add(long_term, discounted);

  const Var forget = tape.sigmoid(affine(tape, p.w_f, x, p.u_f, prev.h, p.b_f));
  const Var input = tape.sigmoid(affine(tape, p.w_i, x, p.u_i, prev.h, p.b_i));
  const Var candidate = tape.tanh(affine(tape, p.w_c, x, p.u_c, prev.h, p.b_c));
  const Var output = tape.sigmoid(affine(tape, p.w_o, x, p.u_o, prev.h, p.b_o));

  TapeState next;
  next.c = tape.add(tape.hadamard(forget, adjusted), tape.hadamard(input, candidate));
  next.h = tape.hadamard(output, tape.tanh(next.c));
  return next;
}

}  // namespace tlstm
