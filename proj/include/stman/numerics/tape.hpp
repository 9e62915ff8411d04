#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stman/numerics/matrix.hpp"
#include "stman/numerics/params.hpp"

namespace stman::num {

/// Backward rule attached to each recorded node.
enum class Op : std::uint8_t {
  Constant,
  Param,
  MatMul,
  Add,
  Sub,
  Hadamard,
  Scale,
  Sigmoid,
  Tanh,
  OneMinus,
  AddBias,
  SoftmaxRows,
  MaskedSoftmaxRows,
  HConcat,
  StackRows,
  SliceCols,
  GatherRows,
  MulCol,
  SelectRows,
  SumAll,
  LogLikelihood,
};

/// Clamp applied inside every log so collapsed probabilities stay finite.
inline constexpr double kLogEpsilon = 1e-12;

struct Node {
  Op op = Op::Constant;
  Matrix value;                 // unused for Param nodes
  Matrix grad;                  // empty until first accumulation
  Parameter* param = nullptr;   // Param nodes only; gradient lands in param->grad
  std::vector<std::uint32_t> parents;
  std::vector<std::int64_t> index;  // op-specific integers (offsets, row ids, targets)
  std::vector<double> aux;          // op-specific reals (masks, weights)
  double scalar = 0.0;
  bool needs_grad = false;

  const Matrix& val() const { return param != nullptr ? param->value : value; }
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  /// Accumulated gradient (all zeros if nothing reached this node).
  Matrix grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;

  Tape* tape() const { return tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Records nodes in creation order; backward replays them in reverse.
/// A tape belongs to exactly one thread of one training run.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf referring to a trainable parameter; no copy of the value is made.
  Var param(Parameter& p);

  /// Seeds d(loss)/d(loss) = 1 and propagates. Parameter gradients are
  /// accumulated (+=) into Parameter::grad; call ParamStore::zero_grad first
  /// to get fresh gradients.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::uint32_t id) const { return nodes_[id]; }
  void clear() { nodes_.clear(); }

  // Used by the op implementations.
  Var push(Node node);
  Node& node_mut(std::uint32_t id) { return nodes_[id]; }

 private:
  void propagate(std::uint32_t id);
  std::vector<Node> nodes_;
};

// ---- Operations -------------------------------------------------------------
// All ops throw ShapeError on incompatible operands, naming both shapes.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var sigmoid(Var a);
Var tanh(Var a);
/// 1 - a, elementwise.
Var one_minus(Var a);
/// a (m×n) + b (1×n) broadcast over rows.
Var add_bias(Var a, Var b);

/// Row-wise softmax with max subtraction.
Var softmax_rows(Var a);
/// Softmax of a single 1×n row vector.
Var softmax_row(Var a);
/// Row-wise softmax restricted to entries with keep != 0. Excluded entries
/// are exactly 0; a row with nothing kept is all zeros.
Var masked_softmax_rows(Var a, std::span<const std::uint8_t> keep);
Var masked_softmax(Var a, std::span<const std::uint8_t> keep);

/// Concatenation of two 1×m and 1×n row vectors. Zero width is rejected.
Var concat(Var a, Var b);
/// Column-wise concatenation of matrices with equal row counts.
Var hconcat(std::span<const Var> parts);
/// Vertical stacking of matrices with equal column counts.
Var stack_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t start, std::size_t width);
/// Rows table[idx[i]]; idx -1 yields a zero row.
Var gather_rows(Var table, std::span<const std::int64_t> idx);
/// Row i of a scaled by c(i, 0).
Var mul_col(Var a, Var c);
/// Row i taken from a where keep[i] != 0, else from b.
Var select_rows(std::span<const std::uint8_t> keep, Var a, Var b);
Var sum_all(Var a);
/// Σ_i w_i · log(max(p(i, t_i), kLogEpsilon)); rows with t_i < 0 are skipped.
Var log_likelihood(Var probs, std::span<const std::int64_t> targets,
                   std::span<const double> weights);

}  // namespace stman::num
