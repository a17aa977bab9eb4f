#pragma once

#include <cstddef>
#include <vector>

#include "tlstm/matrix.hpp"

namespace tlstm {

enum class Primitive {
  kLeaf,
  kMatMul,
  kAdd,
  kSubtract,
  kHadamard,
  kTanh,
  kSigmoid,
  kScale,
  kSumSquares,
  kAddColumn,  // matrix plus a column vector broadcast over its columns
};

const char* primitive_name(Primitive op);

// Handle to a node on a Tape. Only meaningful for the tape that issued it.
struct Var {
  std::size_t index = 0;
};

class Gradients;

// Reverse-mode recording of dense matrix primitives.
//
// Every operation evaluates eagerly, appends a node and returns its handle.
// Nodes created with constant() and every node depending only on constants
// carry no gradient. The tape is single-owner; build one per worker.
class Tape {
 public:
  Var leaf(Matrix value);
  Var constant(Matrix value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var subtract(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var scale(Var a, double factor);
  Var sum_squares(Var a);
  Var add_column(Var m, Var column);

  // Generic entry point; `scalar` is only read by kScale.
  Var apply(Primitive op, Var a, Var b = {}, double scalar = 0.0);

  const Matrix& value(Var v) const { return nodes_.at(v.index).value; }
  Primitive kind(Var v) const { return nodes_.at(v.index).op; }
  bool requires_grad(Var v) const { return nodes_.at(v.index).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Overwrites a leaf value. Call replay() afterwards to refresh dependents.
  void set_leaf(Var v, Matrix value);

  // Recomputes every non-leaf node in recording order from current leaves.
  void replay();

  // Reverse sweep from a 1x1 node. Throws ContractError otherwise.
  Gradients backward(Var loss) const;

 private:
  struct Node {
    Primitive op = Primitive::kLeaf;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
    double scalar = 0.0;
    bool requires_grad = false;
    Matrix value;
  };

  Var push(Primitive op, std::size_t lhs, std::size_t rhs, double scalar);
  Matrix evaluate(const Node& node) const;
  void check(Var v) const;

  std::vector<Node> nodes_;
};

// Adjoints produced by Tape::backward. Nodes never reached have zero gradient.
class Gradients {
 public:
  Gradients() = default;

  // Gradient with the same shape as the node value.
  Matrix operator[](Var v) const;

  // Exact reverse of recording order, as visited by the sweep.
  const std::vector<std::size_t>& visit_order() const { return visit_order_; }

 private:
  friend class Tape;
  std::vector<Matrix> adjoints_;
  std::vector<Eigen::Index> rows_;
  std::vector<Eigen::Index> cols_;
  std::vector<std::size_t> visit_order_;
};

}  // namespace tlstm
