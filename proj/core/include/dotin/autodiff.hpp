#ifndef DOTIN_AUTODIFF_HPP
#define DOTIN_AUTODIFF_HPP

// Define-by-run reverse-mode differentiation. A Tape is rebuilt for every
// forward pass; Var is a lightweight handle (tape pointer + node id) into it.

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "dotin/tensor.hpp"

namespace dotin {

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  [[nodiscard]] bool valid() const { return tape_ != nullptr; }
  [[nodiscard]] Tape& tape() const { return *tape_; }
  [[nodiscard]] std::size_t id() const { return id_; }

  [[nodiscard]] const Tensor& value() const;
  [[nodiscard]] const Shape& shape() const { return value().shape(); }
  [[nodiscard]] std::size_t rows() const { return value().rows(); }
  [[nodiscard]] std::size_t cols() const { return value().cols(); }
  [[nodiscard]] bool requires_grad() const;
  /// Gradient after Tape::backward; zeros when the loss does not reach this node.
  [[nodiscard]] Tensor grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  /// Receives the gradient flowing into the node's output.
  using BackwardFn = std::function<void(Tape&, const Tensor&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  /// Leaf that reads from external storage; `value` must outlive the tape.
  Var parameter(const Tensor& value);

  /// Appends an op node. requires_grad is inherited from the inputs; when no
  /// input needs a gradient the backward rule is dropped.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  /// Reverse accumulation from a 1 x 1 loss. RankError for any other shape.
  void backward(Var loss);
  void zero_grad();

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] const Tensor& value(std::size_t id) const;
  [[nodiscard]] bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  [[nodiscard]] bool has_grad(std::size_t id) const { return nodes_[id].has_grad; }
  [[nodiscard]] const Tensor& grad_ref(std::size_t id) const { return nodes_[id].grad; }
  [[nodiscard]] const std::vector<std::size_t>& inputs(std::size_t id) const {
    return nodes_[id].inputs;
  }
  /// Zero-initialised on first use.
  Tensor& grad_buffer(std::size_t id);

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  Var push(Node node);

  std::deque<Node> nodes_;
};

/// Free-function spelling of Tape::backward.
inline void reverse_accumulate(Tape& tape, Var loss) { tape.backward(loss); }

// Differentiable ops. All inputs must live on the same tape.

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_transposed_b(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double factor);
/// x (n x c) + bias (1 x c) broadcast over rows.
Var add_row_bias(Var x, Var bias);
/// Elementwise product with a constant tensor (dropout masks, priors).
Var multiply_constant(Var a, const Tensor& factor);
Var elu(Var x);
Var relu(Var x);
/// Row-wise softmax of logits / tau over entries where mask > 0.
Var masked_softmax_rows(Var logits, const Tensor& mask, double tau);
/// logits is 1 x C.
Var cross_entropy(Var logits, std::size_t label);
Var sum(Var x);
Var squared_norm(Var x);
/// 1 x c column sums.
Var sum_rows(Var x);
Var gather_rows(Var x, std::span<const std::size_t> rows);
Var gather_cols(Var x, std::span<const std::size_t> cols);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
/// Arithmetic mean of 1 x 1 values.
Var mean_of(std::span<const Var> scalars);

}  // namespace dotin

#endif  // DOTIN_AUTODIFF_HPP
