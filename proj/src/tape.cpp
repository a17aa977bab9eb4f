#include "tlstm/tape.hpp"

#include <string>
#include <utility>

namespace tlstm {

const char* primitive_name(Primitive op) {
  switch (op) {
    case Primitive::kLeaf: return "leaf";
    case Primitive::kMatMul: return "matmul";
    case Primitive::kAdd: return "add";
    case Primitive::kSubtract: return "subtract";
    case Primitive::kHadamard: return "hadamard";
    case Primitive::kTanh: return "tanh";
    case Primitive::kSigmoid: return "sigmoid";
    case Primitive::kScale: return "scale";
    case Primitive::kSumSquares: return "sum_squares";
    case Primitive::kAddColumn: return "add_column";
  }
  return "unknown";
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, Primitive op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(primitive_name(op)) + ": operand shapes " +
                         shape_string(a.rows(), a.cols()) + " and " +
                         shape_string(b.rows(), b.cols()) + " differ");
  }
}

void accumulate(Matrix& adjoint, const Matrix& contribution) {
  if (adjoint.size() == 0) {
    adjoint = contribution;
  } else {
    adjoint += contribution;
  }
}

}  // namespace

void Tape::check(Var v) const {
  if (v.index >= nodes_.size()) throw ContractError("variable does not belong to this tape");
}

Var Tape::leaf(Matrix value) {
  require_finite(value, "leaf");
  Node node;
  node.requires_grad = true;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
  require_finite(value, "constant");
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::matmul(Var a, Var b) { return apply(Primitive::kMatMul, a, b); }
Var Tape::add(Var a, Var b) { return apply(Primitive::kAdd, a, b); }
Var Tape::subtract(Var a, Var b) { return apply(Primitive::kSubtract, a, b); }
Var Tape::hadamard(Var a, Var b) { return apply(Primitive::kHadamard, a, b); }
Var Tape::tanh(Var a) { return apply(Primitive::kTanh, a); }
Var Tape::sigmoid(Var a) { return apply(Primitive::kSigmoid, a); }
Var Tape::scale(Var a, double factor) { return apply(Primitive::kScale, a, {}, factor); }
Var Tape::sum_squares(Var a) { return apply(Primitive::kSumSquares, a); }
Var Tape::add_column(Var m, Var column) { return apply(Primitive::kAddColumn, m, column); }

Var Tape::apply(Primitive op, Var a, Var b, double scalar) {
  if (op == Primitive::kLeaf) throw ContractError("apply: use leaf() or constant() for leaves");
  check(a);
  const bool binary = op == Primitive::kMatMul || op == Primitive::kAdd ||
                      op == Primitive::kSubtract || op == Primitive::kHadamard ||
                      op == Primitive::kAddColumn;
  if (binary) check(b);
  return push(op, a.index, binary ? b.index : a.index, scalar);
}

Var Tape::push(Primitive op, std::size_t lhs, std::size_t rhs, double scalar) {
  Node node;
  node.op = op;
  node.lhs = lhs;
  node.rhs = rhs;
  node.scalar = scalar;
  node.requires_grad = nodes_[lhs].requires_grad || nodes_[rhs].requires_grad;
  node.value = evaluate(node);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Matrix Tape::evaluate(const Node& node) const {
  const Matrix& a = nodes_[node.lhs].value;
  const Matrix& b = nodes_[node.rhs].value;
  Matrix out;
  switch (node.op) {
    case Primitive::kLeaf:
      return node.value;
    case Primitive::kMatMul:
      if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions of " + shape_string(a.rows(), a.cols()) +
                             " and " + shape_string(b.rows(), b.cols()) + " differ");
      }
      out.noalias() = a * b;
      break;
    case Primitive::kAdd:
      require_same_shape(a, b, node.op);
      out = a + b;
      break;
    case Primitive::kSubtract:
      require_same_shape(a, b, node.op);
      out = a - b;
      break;
    case Primitive::kHadamard:
      require_same_shape(a, b, node.op);
      out = a.cwiseProduct(b);
      break;
    case Primitive::kTanh:
      out = a.array().tanh().matrix();
      break;
    case Primitive::kSigmoid:
      out = tlstm::sigmoid(a);
      break;
    case Primitive::kScale:
      out = node.scalar * a;
      break;
    case Primitive::kSumSquares:
      out = Matrix::Constant(1, 1, a.squaredNorm());
      break;
    case Primitive::kAddColumn:
      if (b.cols() != 1 || b.rows() != a.rows()) {
        throw DimensionError("add_column: expected a " + shape_string(a.rows(), 1) +
                             " column, got " + shape_string(b.rows(), b.cols()));
      }
      out = a.colwise() + b.col(0);
      break;
  }
  if (!out.allFinite()) {
    throw NumericError(std::string(primitive_name(node.op)) + ": non-finite result");
  }
  return out;
}

void Tape::set_leaf(Var v, Matrix value) {
  check(v);
  Node& node = nodes_[v.index];
  if (node.op != Primitive::kLeaf) throw ContractError("set_leaf: node is not a leaf");
  if (value.rows() != node.value.rows() || value.cols() != node.value.cols()) {
    throw DimensionError("set_leaf: shape " + shape_string(value.rows(), value.cols()) +
                         " does not match " +
                         shape_string(node.value.rows(), node.value.cols()));
  }
  require_finite(value, "leaf");
  node.value = std::move(value);
}

void Tape::replay() {
  for (Node& node : nodes_) {
    if (node.op != Primitive::kLeaf) node.value = evaluate(node);
  }
}

Gradients Tape::backward(Var loss) const {
  check(loss);
  const Matrix& out = nodes_[loss.index].value;
  if (out.rows() != 1 || out.cols() != 1) {
    throw ContractError("backward: loss node must be 1x1, got " +
                        shape_string(out.rows(), out.cols()));
  }

  Gradients grads;
  grads.adjoints_.resize(nodes_.size());
  grads.rows_.resize(nodes_.size());
  grads.cols_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    grads.rows_[i] = nodes_[i].value.rows();
    grads.cols_[i] = nodes_[i].value.cols();
  }
  grads.adjoints_[loss.index] = Matrix::Ones(1, 1);

  auto& adj = grads.adjoints_;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    grads.visit_order_.push_back(i);
    const Node& node = nodes_[i];
    if (node.op == Primitive::kLeaf || !node.requires_grad || adj[i].size() == 0) continue;

    const Matrix& g = adj[i];
    const Matrix& a = nodes_[node.lhs].value;
    const Matrix& b = nodes_[node.rhs].value;
    const bool grad_a = nodes_[node.lhs].requires_grad;
    const bool grad_b = nodes_[node.rhs].requires_grad;

    switch (node.op) {
      case Primitive::kLeaf:
        break;
      case Primitive::kMatMul:
        if (grad_a) accumulate(adj[node.lhs], g * b.transpose());
        if (grad_b) accumulate(adj[node.rhs], a.transpose() * g);
        break;
      case Primitive::kAdd:
        if (grad_a) accumulate(adj[node.lhs], g);
        if (grad_b) accumulate(adj[node.rhs], g);
        break;
      case Primitive::kSubtract:
        if (grad_a) accumulate(adj[node.lhs], g);
        if (grad_b) accumulate(adj[node.rhs], -g);
        break;
      case Primitive::kHadamard:
        // Squaring (a == b) accumulates both halves into the same slot.
        if (grad_a) accumulate(adj[node.lhs], g.cwiseProduct(b));
        if (grad_b) accumulate(adj[node.rhs], g.cwiseProduct(a));
        break;
      case Primitive::kTanh: {
        const Matrix& y = node.value;
        accumulate(adj[node.lhs], g.array() * (1.0 - y.array().square()));
        break;
      }
      case Primitive::kSigmoid: {
        const Matrix& y = node.value;
        accumulate(adj[node.lhs], g.array() * y.array() * (1.0 - y.array()));
        break;
      }
      case Primitive::kScale:
        accumulate(adj[node.lhs], node.scalar * g);
        break;
      case Primitive::kSumSquares:
        accumulate(adj[node.lhs], (2.0 * g(0, 0)) * a);
        break;
      case Primitive::kAddColumn:
        if (grad_a) accumulate(adj[node.lhs], g);
        if (grad_b) accumulate(adj[node.rhs], g.rowwise().sum());
        break;
    }
  }
  return grads;
}

Matrix Gradients::operator[](Var v) const {
  if (v.index >= adjoints_.size()) throw ContractError("gradient requested for unknown variable");
  if (adjoints_[v.index].size() == 0) return Matrix::Zero(rows_[v.index], cols_[v.index]);
  return adjoints_[v.index];
}

}  // namespace tlstm
