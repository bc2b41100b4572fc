#ifndef DOTIN_BACKBONE_HPP
#define DOTIN_BACKBONE_HPP

// GCN and GAT propagation on (features, weighted adjacency) pairs.

#include <string>
#include <vector>

#include "dotin/autodiff.hpp"
#include "dotin/tensor.hpp"

namespace dotin {

enum class Activation { identity, elu };
enum class BackboneKind { gat, gcn };

Activation parse_activation(const std::string& name);
BackboneKind parse_backbone(const std::string& name);
std::string backbone_name(BackboneKind kind);

Var apply_activation(Var x, Activation activation);

/// D^{-1/2} (A + I) D^{-1/2}, D the row-degree matrix of A + I.
/// DomainError on negative entries, DimensionError if A is not square.
Tensor normalize_adjacency(const Tensor& adjacency);

/// 1 where A + I is nonzero, 0 elsewhere.
Tensor self_loop_mask(const Tensor& adjacency);

struct GcnLayerParams {
  Var theta;  ///< D_in x D_out
};

/// sigma(normalize(A) x theta). The adjacency passes through unchanged.
Var gcn_layer(Var x, const Tensor& adjacency, const GcnLayerParams& params, Activation activation);

struct GatHeadParams {
  Var w1;     ///< D_in x D_att
  Var w2;     ///< D_in x D_att
  Var w_out;  ///< D_in x (D_out / heads)
};

struct GatLayerParams {
  std::vector<GatHeadParams> heads;
};

struct GatOutput {
  Var features;
  std::vector<Var> attention;  ///< per head, rows sum to one over the mask support
  std::vector<Var> query;      ///< x W1 per head
  std::vector<Var> key;        ///< x W2 per head
};

struct GatOptions {
  Activation activation = Activation::elu;
  /// Adds log(w_ij) to the attention logits so rewired edge weights act as
  /// multiplicative priors. Off by default: weights only define the support.
  bool edge_weight_prior = false;
};

/// S = row-softmax((x W1)(x W2)^T / sqrt(D_att)) restricted to a_mask > 0,
/// output = sigma(S (x W_out)), heads concatenated along columns.
/// `a_mask` must already contain self-loops; a row without support raises
/// EmptySupportError.
GatOutput gat_layer(Var x, const Tensor& a_mask, const GatLayerParams& params,
                    const GatOptions& options = {});

}  // namespace dotin

#endif  // DOTIN_BACKBONE_HPP
