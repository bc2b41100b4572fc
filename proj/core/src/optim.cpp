#include "dotin/optim.hpp"

#include <cmath>
#include <cstring>

#include "dotin/errors.hpp"

namespace dotin {

std::size_t ParameterStore::add(std::string name, Tensor init) {
  if (contains(name)) throw SpecError("parameter '" + name + "' registered twice");
  names_.push_back(std::move(name));
  grads_.emplace_back(init.rows(), init.cols());
  values_.push_back(std::move(init));
  return values_.size() - 1;
}

bool ParameterStore::contains(std::string_view name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

std::size_t ParameterStore::index(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw IndexError("unknown parameter '" + std::string(name) + "'");
}

void ParameterStore::zero_grads() {
  for (Tensor& g : grads_) g.fill(0.0);
}

std::vector<Var> ParameterStore::bind(Tape& tape) const {
  std::vector<Var> out;
  out.reserve(values_.size());
  for (const Tensor& v : values_) out.push_back(tape.parameter(v));
  return out;
}

void ParameterStore::collect_grads(std::span<const Var> bound) {
  if (bound.size() != values_.size()) {
    throw DimensionError("collect_grads: " + std::to_string(bound.size()) + " vars for " +
                         std::to_string(values_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < bound.size(); ++i) {
    const Tape& tape = bound[i].tape();
    if (tape.has_grad(bound[i].id())) grads_[i] += tape.grad_ref(bound[i].id());
  }
}

std::size_t ParameterStore::element_count() const {
  std::size_t n = 0;
  for (const Tensor& v : values_) n += v.size();
  return n;
}

std::uint64_t ParameterStore::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Tensor& v : values_) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    for (std::size_t i = 0; i < v.size() * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

AdamState make_adam_state(std::span<const Tensor> params, AdamOptions options) {
  AdamState state;
  state.options = options;
  for (const Tensor& p : params) {
    state.m.emplace_back(p.rows(), p.cols());
    state.v.emplace_back(p.rows(), p.cols());
  }
  return state;
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " params, " +
                         std::to_string(grads.size()) + " grads, " +
                         std::to_string(state.m.size()) + " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape() || params[i].shape() != state.m[i].shape() ||
        params[i].shape() != state.v[i].shape()) {
      throw DimensionError("adam_step: parameter " + std::to_string(i) + " has shape " +
                           params[i].shape().str() + " but grad " + grads[i].shape().str());
    }
  }
  const AdamOptions& o = state.options;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bias1 = 1.0 - std::pow(o.beta1, t);
  const double bias2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    const Tensor& g = grads[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] -= o.lr * o.weight_decay * p[j];
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      p[j] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
  }
}

}  // namespace dotin
