#ifndef DOTIN_OPTIM_HPP
#define DOTIN_OPTIM_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dotin/autodiff.hpp"
#include "dotin/tensor.hpp"

namespace dotin {

/// Named learnable tensors with matching gradient accumulators.
class ParameterStore {
 public:
  std::size_t add(std::string name, Tensor init);

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] bool contains(std::string_view name) const;
  /// Throws IndexError for an unknown name.
  [[nodiscard]] std::size_t index(std::string_view name) const;
  [[nodiscard]] const std::string& name(std::size_t i) const { return names_[i]; }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }

  Tensor& value(std::size_t i) { return values_[i]; }
  [[nodiscard]] const Tensor& value(std::size_t i) const { return values_[i]; }
  Tensor& value(std::string_view name) { return values_[index(name)]; }
  [[nodiscard]] const Tensor& value(std::string_view name) const { return values_[index(name)]; }
  [[nodiscard]] const Tensor& grad(std::size_t i) const { return grads_[i]; }

  std::span<Tensor> values() { return values_; }
  [[nodiscard]] std::span<const Tensor> values() const { return values_; }
  std::span<Tensor> grads() { return grads_; }
  [[nodiscard]] std::span<const Tensor> grads() const { return grads_; }

  void zero_grads();
  /// Registers every parameter on the tape (no copies), in index order.
  [[nodiscard]] std::vector<Var> bind(Tape& tape) const;
  /// Adds tape gradients of previously bound vars into the accumulators.
  void collect_grads(std::span<const Var> bound);

  [[nodiscard]] std::size_t element_count() const;
  /// FNV-1a over the raw bytes of every value; used to prove purity.
  [[nodiscard]] std::uint64_t checksum() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
};

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  AdamOptions options;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t t = 0;
};

AdamState make_adam_state(std::span<const Tensor> params, AdamOptions options);

/// One Adam update. Weight decay is decoupled: p <- p - lr * wd * p happens
/// before the moment update. DimensionError if any shapes disagree.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state);

}  // namespace dotin

#endif  // DOTIN_OPTIM_HPP
