#include "dotin/autodiff.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dotin/errors.hpp"

namespace dotin {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Tensor& t) { return ConstMap(t.data(), t.rows(), t.cols()); }
MutMap view(Tensor& t) { return MutMap(t.data(), t.rows(), t.cols()); }

Tape& same_tape(Var a, Var b) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw Error("autodiff: operands recorded on different tapes");
  }
  return a.tape();
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape().str() + " and " +
                         b.shape().str());
  }
}

// Adds g into the gradient of node id when that node wants one.
void accumulate(Tape& tape, std::size_t id, const Tensor& g) {
  if (!tape.requires_grad(id)) return;
  tape.grad_buffer(id) += g;
}

}  // namespace

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Tensor Var::grad() const {
  if (tape_->has_grad(id_)) return tape_->grad_ref(id_);
  return Tensor(rows(), cols());
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::parameter(const Tensor& value) {
  Node n;
  n.external = &value;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw Error("autodiff: input recorded on a different tape");
    n.inputs.push_back(in.id());
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external != nullptr ? *n.external : n.owned;
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    const Tensor& v = value(id);
    n.grad = Tensor(v.rows(), v.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::zero_grad() {
  for (Node& n : nodes_) {
    n.grad = Tensor();
    n.has_grad = false;
  }
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw Error("backward: loss recorded on a different tape");
  if (loss.shape() != Shape{1, 1}) {
    throw RankError("backward: loss must be a scalar, got " + loss.shape().str());
  }
  if (!requires_grad(loss.id())) return;
  grad_buffer(loss.id())[0] += 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return tape.record(matmul(a.value(), b.value()), {a, b}, [ia, ib](Tape& t, const Tensor& g) {
    if (t.requires_grad(ia) && g.cols() > 0) {
      view(t.grad_buffer(ia)).noalias() += view(g) * view(t.value(ib)).transpose();
    }
    if (t.requires_grad(ib) && g.rows() > 0) {
      view(t.grad_buffer(ib)).noalias() += view(t.value(ia)).transpose() * view(g);
    }
  });
}

Var matmul_transposed_b(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return tape.record(matmul_transposed_b(a.value(), b.value()), {a, b},
                     [ia, ib](Tape& t, const Tensor& g) {
                       if (g.empty()) return;
                       if (t.requires_grad(ia)) {
                         view(t.grad_buffer(ia)).noalias() += view(g) * view(t.value(ib));
                       }
                       if (t.requires_grad(ib)) {
                         view(t.grad_buffer(ib)).noalias() +=
                             view(g).transpose() * view(t.value(ia));
                       }
                     });
}

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  require_same_shape("add", a, b);
  Tensor out = a.value();
  out += b.value();
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib](Tape& t, const Tensor& g) {
    accumulate(t, ia, g);
    accumulate(t, ib, g);
  });
}

Var sub(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  require_same_shape("sub", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib](Tape& t, const Tensor& g) {
    accumulate(t, ia, g);
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var hadamard(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  require_same_shape("hadamard", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib](Tape& t, const Tensor& g) {
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      const Tensor& bv = t.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      const Tensor& av = t.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, factor](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var add_row_bias(Var x, Var bias) {
  Tape& tape = same_tape(x, bias);
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw DimensionError("add_row_bias: incompatible shapes " + x.shape().str() + " and " +
                         bias.shape().str());
  }
  Tensor out = x.value();
  const Tensor& b = bias.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b[c];
  const std::size_t ix = x.id();
  const std::size_t ib = bias.id();
  return tape.record(std::move(out), {x, bias}, [ix, ib](Tape& t, const Tensor& g) {
    accumulate(t, ix, g);
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
    }
  });
}

Var multiply_constant(Var a, const Tensor& factor) {
  if (factor.shape() != a.shape()) {
    throw DimensionError("multiply_constant: incompatible shapes " + a.shape().str() + " and " +
                         factor.shape().str());
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor[i];
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, factor](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor[i];
  });
}

Var elu(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = elu(v);
  Tape& tape = x.tape();
  const std::size_t ix = x.id();
  const std::size_t iy = tape.size();  // id of the node recorded below
  return tape.record(std::move(out), {x}, [ix, iy](Tape& t, const Tensor& g) {
    // d/dx elu = 1 for x > 0, elu(x) + 1 otherwise.
    Tensor& gx = t.grad_buffer(ix);
    const Tensor& in = t.value(ix);
    const Tensor& y = t.value(iy);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (in[i] > 0.0 ? 1.0 : y[i] + 1.0);
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buffer(ix);
    const Tensor& in = t.value(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += in[i] > 0.0 ? g[i] : 0.0;
  });
}

Var masked_softmax_rows(Var logits, const Tensor& mask, double tau) {
  if (mask.shape() != logits.shape()) {
    throw DimensionError("masked_softmax_rows: incompatible shapes " + logits.shape().str() +
                         " and " + mask.shape().str());
  }
  if (!(tau > 0.0)) throw DomainError("masked_softmax_rows: tau must be positive");
  const Tensor& z = logits.value();
  Tensor out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < z.cols(); ++c) {
      if (mask(r, c) > 0.0) peak = std::max(peak, z(r, c) / tau);
    }
    if (peak == -std::numeric_limits<double>::infinity()) {
      throw EmptySupportError("masked_softmax_rows: row " + std::to_string(r) +
                              " has no unmasked entry");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) {
      if (mask(r, c) > 0.0) {
        out(r, c) = std::exp(z(r, c) / tau - peak);
        total += out(r, c);
      }
    }
    for (std::size_t c = 0; c < z.cols(); ++c) out(r, c) /= total;
  }
  Tape& tape = logits.tape();
  const std::size_t iz = logits.id();
  const std::size_t iy = tape.size();
  return tape.record(std::move(out), {logits}, [iz, iy, tau](Tape& t, const Tensor& g) {
    // dz_j = y_j (g_j - sum_k g_k y_k) / tau; masked entries have y = 0.
    Tensor& gz = t.grad_buffer(iz);
    const Tensor& y = t.value(iy);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) gz(r, c) += y(r, c) * (g(r, c) - dot) / tau;
    }
  });
}

Var cross_entropy(Var logits, std::size_t label) {
  if (logits.rows() != 1) {
    throw DimensionError("cross_entropy: logits must be 1 x C, got " + logits.shape().str());
  }
  const Tensor& z = logits.value();
  const double loss = cross_entropy_from_logits(z.values(), label);
  const std::size_t iz = logits.id();
  return logits.tape().record(Tensor::scalar(loss), {logits}, [iz, label](Tape& t,
                                                                        const Tensor& g) {
    const std::vector<double> p = softmax(t.value(iz).values());
    Tensor& gz = t.grad_buffer(iz);
    for (std::size_t c = 0; c < p.size(); ++c) {
      gz[c] += g[0] * (p[c] - (c == label ? 1.0 : 0.0));
    }
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  const std::size_t ix = x.id();
  return x.tape().record(Tensor::scalar(total), {x}, [ix](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buffer(ix);
    for (double& v : gx.values()) v += g[0];
  });
}

Var squared_norm(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v * v;
  const std::size_t ix = x.id();
  return x.tape().record(Tensor::scalar(total), {x}, [ix](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buffer(ix);
    const Tensor& in = t.value(ix);
    for (std::size_t i = 0; i < in.size(); ++i) gx[i] += 2.0 * in[i] * g[0];
  });
}

Var sum_rows(Var x) {
  const Tensor& in = x.value();
  Tensor out(1, in.cols());
  for (std::size_t r = 0; r < in.rows(); ++r)
    for (std::size_t c = 0; c < in.cols(); ++c) out[c] += in(r, c);
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buffer(ix);
    for (std::size_t r = 0; r < gx.rows(); ++r)
      for (std::size_t c = 0; c < gx.cols(); ++c) gx(r, c) += g[c];
  });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
  const Tensor& in = x.value();
  Tensor out(rows.size(), in.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= in.rows()) {
      throw IndexError("gather_rows: row " + std::to_string(rows[i]) + " outside " +
                       in.shape().str());
    }
    std::copy_n(in.row(rows[i]).data(), in.cols(), out.row(i).data());
  }
  const std::size_t ix = x.id();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return x.tape().record(std::move(out), {x}, [ix, idx = std::move(idx)](Tape& t,
                                                                         const Tensor& g) {
    Tensor& gx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < g.cols(); ++c) gx(idx[i], c) += g(i, c);
  });
}

Var gather_cols(Var x, std::span<const std::size_t> cols) {
  const Tensor& in = x.value();
  Tensor out(in.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] >= in.cols()) {
      throw IndexError("gather_cols: column " + std::to_string(cols[j]) + " outside " +
                       in.shape().str());
    }
    for (std::size_t r = 0; r < in.rows(); ++r) out(r, j) = in(r, cols[j]);
  }
  const std::size_t ix = x.id();
  std::vector<std::size_t> idx(cols.begin(), cols.end());
  return x.tape().record(std::move(out), {x}, [ix, idx = std::move(idx)](Tape& t,
                                                                         const Tensor& g) {
    Tensor& gx = t.grad_buffer(ix);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t j = 0; j < idx.size(); ++j) gx(r, idx[j]) += g(r, j);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: incompatible shapes " + parts.front().shape().str() +
                           " and " + p.shape().str());
    }
    rows += p.rows();
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> ids;
  std::size_t at = 0;
  for (const Var& p : parts) {
    std::copy(p.value().values().begin(), p.value().values().end(), out.data() + at * cols);
    offsets.push_back(at);
    ids.push_back(p.id());
    at += p.rows();
  }
  return parts.front().tape().record(
      std::move(out), parts, [offsets = std::move(offsets), ids = std::move(ids)](
                                 Tape& t, const Tensor& g) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!t.requires_grad(ids[k])) continue;
          Tensor& gp = t.grad_buffer(ids[k]);
          const double* src = g.data() + offsets[k] * g.cols();
          for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += src[i];
        }
      });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: incompatible shapes " + parts.front().shape().str() +
                           " and " + p.shape().str());
    }
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> ids;
  std::size_t at = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) out(r, at + c) = v(r, c);
    offsets.push_back(at);
    ids.push_back(p.id());
    at += v.cols();
  }
  return parts.front().tape().record(
      std::move(out), parts, [offsets = std::move(offsets), ids = std::move(ids)](
                                 Tape& t, const Tensor& g) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!t.requires_grad(ids[k])) continue;
          Tensor& gp = t.grad_buffer(ids[k]);
          for (std::size_t r = 0; r < gp.rows(); ++r)
            for (std::size_t c = 0; c < gp.cols(); ++c) gp(r, c) += g(r, offsets[k] + c);
        }
      });
}

Var mean_of(std::span<const Var> scalars) {
  if (scalars.empty()) throw SpecError("mean_of: empty list");
  double total = 0.0;
  std::vector<std::size_t> ids;
  for (const Var& s : scalars) {
    if (s.shape() != Shape{1, 1}) throw RankError("mean_of: non-scalar input " + s.shape().str());
    total += s.value()[0];
    ids.push_back(s.id());
  }
  const double inv = 1.0 / static_cast<double>(scalars.size());
  return scalars.front().tape().record(
      Tensor::scalar(total * inv), scalars, [ids = std::move(ids), inv](Tape& t, const Tensor& g) {
        for (std::size_t id : ids) {
          if (t.requires_grad(id)) t.grad_buffer(id)[0] += g[0] * inv;
        }
      });
}

}  // namespace dotin
