#include "dotin/backbone.hpp"

#include <cmath>

#include "dotin/errors.hpp"

namespace dotin {
namespace {

void require_square_non_negative(const Tensor& a, const char* op) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(op) + ": adjacency " + a.shape().str() + " is not square");
  }
  for (double v : a.values()) {
    if (v < 0.0) throw DomainError(std::string(op) + ": negative adjacency weight");
  }
}

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "elu") return Activation::elu;
  if (name == "identity" || name == "linear") return Activation::identity;
  throw ConfigError("unknown activation '" + name + "' (elu, identity)");
}

BackboneKind parse_backbone(const std::string& name) {
  if (name == "gat") return BackboneKind::gat;
  if (name == "gcn") return BackboneKind::gcn;
  throw ConfigError("unknown backbone '" + name + "' (gat, gcn)");
}

std::string backbone_name(BackboneKind kind) { return kind == BackboneKind::gat ? "gat" : "gcn"; }

Var apply_activation(Var x, Activation activation) {
  return activation == Activation::elu ? elu(x) : x;
}

Tensor normalize_adjacency(const Tensor& adjacency) {
  require_square_non_negative(adjacency, "normalize_adjacency");
  const std::size_t n = adjacency.rows();
  Tensor out = adjacency;
  for (std::size_t i = 0; i < n; ++i) out(i, i) += 1.0;
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (double v : out.row(i)) degree += v;
    inv_sqrt[i] = 1.0 / std::sqrt(degree);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) *= inv_sqrt[i] * inv_sqrt[j];
  return out;
}

Tensor self_loop_mask(const Tensor& adjacency) {
  require_square_non_negative(adjacency, "self_loop_mask");
  Tensor mask(adjacency.rows(), adjacency.cols());
  for (std::size_t i = 0; i < adjacency.rows(); ++i)
    for (std::size_t j = 0; j < adjacency.cols(); ++j)
      mask(i, j) = (i == j || adjacency(i, j) > 0.0) ? 1.0 : 0.0;
  return mask;
}

Var gcn_layer(Var x, const Tensor& adjacency, const GcnLayerParams& params, Activation activation) {
  if (x.cols() != params.theta.rows()) {
    throw DimensionError("gcn_layer: features " + x.shape().str() + " vs theta " +
                         params.theta.shape().str());
  }
  if (adjacency.rows() != x.rows()) {
    throw DimensionError("gcn_layer: adjacency " + adjacency.shape().str() + " vs features " +
                         x.shape().str());
  }
  Var a_hat = x.tape().constant(normalize_adjacency(adjacency));
  return apply_activation(matmul(a_hat, matmul(x, params.theta)), activation);
}

GatOutput gat_layer(Var x, const Tensor& a_mask, const GatLayerParams& params,
                    const GatOptions& options) {
  if (params.heads.empty()) throw SpecError("gat_layer: no attention heads");
  require_square_non_negative(a_mask, "gat_layer");
  if (a_mask.rows() != x.rows()) {
    throw DimensionError("gat_layer: mask " + a_mask.shape().str() + " vs features " +
                         x.shape().str());
  }
  Tensor support(a_mask.rows(), a_mask.cols());
  Tensor log_prior(a_mask.rows(), a_mask.cols());
  for (std::size_t i = 0; i < a_mask.size(); ++i) {
    support[i] = a_mask[i] > 0.0 ? 1.0 : 0.0;
    if (a_mask[i] > 0.0) log_prior[i] = std::log(a_mask[i]);
  }
  Tape& tape = x.tape();
  GatOutput out;
  std::vector<Var> head_outputs;
  for (const GatHeadParams& head : params.heads) {
    if (x.cols() != head.w1.rows() || x.cols() != head.w2.rows() ||
        x.cols() != head.w_out.rows()) {
      throw DimensionError("gat_layer: features " + x.shape().str() + " vs weights " +
                           head.w1.shape().str() + ", " + head.w2.shape().str() + ", " +
                           head.w_out.shape().str());
    }
    if (head.w1.cols() != head.w2.cols()) {
      throw DimensionError("gat_layer: W1 " + head.w1.shape().str() + " and W2 " +
                           head.w2.shape().str() + " disagree on the attention dimension");
    }
    const double tau = std::sqrt(static_cast<double>(head.w1.cols()));
    Var query = matmul(x, head.w1);
    Var key = matmul(x, head.w2);
    Var logits = matmul_transposed_b(query, key);
    Var attention = options.edge_weight_prior
                        ? masked_softmax_rows(add(scale(logits, 1.0 / tau), tape.constant(log_prior)),
                                              support, 1.0)
                        : masked_softmax_rows(logits, support, tau);
    head_outputs.push_back(matmul(attention, matmul(x, head.w_out)));
    out.attention.push_back(attention);
    out.query.push_back(query);
    out.key.push_back(key);
  }
  Var combined = head_outputs.size() == 1 ? head_outputs.front() : concat_cols(head_outputs);
  out.features = apply_activation(combined, options.activation);
  return out;
}

}  // namespace dotin
