#ifndef DOTIN_DROP_HPP
#define DOTIN_DROP_HPP

// Task-irrelevant node dropping: virtual-node injection, attentiveness
// scoring, drop selection, attentive fusion and edge rewiring.
//
// Row layout of an augmented graph is always
//   [non-virtual rows (raw and fused) ..., K virtual rows]
// so a drop stage keeps the survivors in their original order, appends the
// fused row after them and re-attaches the virtual rows at the end.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dotin/autodiff.hpp"
#include "dotin/tensor.hpp"

namespace dotin {

enum class RowKind { raw, virtual_node, fused };

struct RowTag {
  RowKind kind = RowKind::raw;
  /// Raw rows: index in the input graph. Fused rows: -1.
  long long origin = -1;
  /// Virtual rows: task index. Fused rows: stage that created them.
  std::size_t slot = 0;

  friend bool operator==(const RowTag&, const RowTag&) = default;
};

struct AugmentedGraph {
  Var features;
  Tensor adjacency;
  std::vector<RowTag> tags;

  [[nodiscard]] std::size_t num_rows() const { return tags.size(); }
  [[nodiscard]] std::size_t num_virtual() const;
  [[nodiscard]] std::size_t num_nonvirtual() const { return num_rows() - num_virtual(); }
  [[nodiscard]] std::vector<std::size_t> virtual_rows() const;
  [[nodiscard]] std::vector<std::size_t> nonvirtual_rows() const;
};

/// Appends the K bank rows (K x D) after the N raw rows. Each virtual row gets
/// weight-1 edges to and from every raw row; virtual-virtual entries stay 0.
/// DimensionError when the bank width differs from the feature width.
AugmentedGraph inject_virtual_nodes(Var raw_features, const Tensor& adjacency, Var bank);

/// Adds K virtual rows/columns connected with weight 1 to every existing row.
Tensor connect_virtuals(const Tensor& nonvirtual_adjacency, std::size_t k);

/// Pre-softmax scores s_i = sum_k q_k . key_i; q_virtual is K x d (virtual
/// rows through W1), key_raw is N x d (raw rows through W2). Returns 1 x N.
Var attentiveness_logits(Var q_virtual, Var key_raw);

/// softmax(attentiveness_logits / tau) over the raw nodes, 1 x N.
/// EmptySupportError when there are no raw nodes.
Var attentiveness(Var q_virtual, Var key_raw, double tau);

/// floor(n * alpha).
std::size_t drop_count(std::size_t n, double alpha);

/// Rows surviving one drop stage: ceil(n(1-alpha) + k) + 1 when at least one
/// node drops, otherwise n + k (no fused row is created).
std::size_t remaining_count(std::size_t n, double alpha, std::size_t k);

struct DropPlan {
  std::vector<double> scores;         ///< attentiveness over the stage's non-virtual rows
  std::size_t drop_count = 0;
  std::vector<std::size_t> dropped;   ///< ascending by (score, index)
  std::vector<std::size_t> kept;      ///< ascending index
  std::vector<double> lambda;         ///< fusion weights aligned with `dropped`

  [[nodiscard]] bool empty() const { return dropped.empty(); }
};

/// Indices of the `count` smallest scores, ties broken by lower index first.
std::vector<std::size_t> smallest_indices(std::span<const double> scores, std::size_t count);

/// `count` distinct indices drawn uniformly from [0, n), in draw order.
std::vector<std::size_t> random_indices(std::size_t n, std::size_t count, std::mt19937_64& rng);

/// Builds a plan around an externally chosen drop set. lambda is the softmax
/// of `lambda_source` restricted to the dropped entries.
DropPlan make_drop_plan(std::span<const double> scores, std::vector<std::size_t> dropped,
                        std::span<const double> lambda_source);

/// Drops the floor(N alpha) lowest-attentiveness nodes. DomainError unless
/// 0 < alpha < 1. A zero drop count gives an empty plan.
DropPlan select_drop(std::span<const double> scores, double alpha);

/// sum_i lambda_i x_i over the dropped rows. SpecError for an empty drop set.
std::vector<double> fuse_dropped(const Tensor& x_dropped, std::span<const double> lambda);
/// Differentiable form; lambda is 1 x m, x_dropped is m x D.
Var fuse_dropped(Var x_dropped, Var lambda);

/// Rewires the non-virtual adjacency (n x n) for a nonempty plan. Result is
/// (|kept| + 1) square: kept rows in order, then the fused row. Each kept
/// row's weight to the fused node is the sum of its weights into the dropped
/// set; every row is then replaced by a softmax over its nonzero entries.
Tensor rewire_edges(const Tensor& nonvirtual_adjacency, const DropPlan& plan);

/// One linear-GCN step of the virtual rows with mean aggregation and identity
/// weights: x_gk' = (sum_i x_i + x_gk) / (2 + n_kept), where `nonvirtual`
/// holds the n_kept kept rows plus the fused row. Diagnostic only: it shows
/// that all virtual rows collapse towards the same point.
Tensor gcn_virtual_degeneracy_probe(std::size_t n_kept, const Tensor& virtuals,
                                    const Tensor& nonvirtual);

/// `graph_id,stage,node,score,dropped` rows for one plan. `origins` maps the
/// plan's row indices to original node ids (-1 for fused rows).
std::string drop_plan_csv_rows(std::size_t graph_id, std::size_t stage, const DropPlan& plan,
                               std::span<const long long> origins);
inline constexpr const char* kDropPlanCsvHeader = "graph_id,stage,node,score,dropped\n";

}  // namespace dotin

#endif  // DOTIN_DROP_HPP
