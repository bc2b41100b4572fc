#ifndef DOTIN_GRAPH_HPP
#define DOTIN_GRAPH_HPP

// Graph data model and dataset plumbing: TU-format ingestion, synthetic motif
// graphs, block-diagonal batching and stratified k-fold splits.
//
// Adjacency is dense. Every graph here has a few hundred nodes at most, so
// N^2 storage is fine and keeps edge rewiring simple; very large graphs are
// out of reach by construction.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dotin/tensor.hpp"

namespace dotin {

/// Label key used for the graph-classification task.
inline constexpr const char* kClassLabel = "class";

struct GraphInstance {
  Tensor features;   ///< N x F
  Tensor adjacency;  ///< N x N, non-negative, zero diagonal at ingestion
  std::map<std::string, std::size_t> labels;

  [[nodiscard]] std::size_t num_nodes() const { return features.rows(); }
  [[nodiscard]] std::size_t feature_dim() const { return features.cols(); }
  /// Number of node pairs i < j with a nonzero weight in either direction.
  [[nodiscard]] std::size_t edge_count() const;
  [[nodiscard]] std::size_t label(const std::string& task = kClassLabel) const;
  /// Throws ConsistencyError / DomainError when an invariant is broken.
  void validate() const;

  friend bool operator==(const GraphInstance&, const GraphInstance&) = default;
};

struct GraphSet {
  std::string name;
  std::size_t feature_dim = 0;
  std::size_t num_classes = 0;
  std::vector<GraphInstance> graphs;

  [[nodiscard]] std::size_t size() const { return graphs.size(); }
  [[nodiscard]] std::vector<GraphInstance> subset(std::span<const std::size_t> indices) const;
  [[nodiscard]] double mean_nodes() const;

  friend bool operator==(const GraphSet&, const GraphSet&) = default;
};

struct NodeRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  [[nodiscard]] std::size_t size() const { return end - begin; }
  friend bool operator==(const NodeRange&, const NodeRange&) = default;
};

/// Block-diagonal union of several graphs.
struct Batch {
  Tensor features;
  Tensor adjacency;
  std::vector<NodeRange> ranges;
  std::vector<std::map<std::string, std::size_t>> labels;

  [[nodiscard]] std::size_t num_graphs() const { return ranges.size(); }
  /// Copies graph i back out of the block structure.
  [[nodiscard]] GraphInstance graph(std::size_t i) const;
};

/// Reads DS_A.txt, DS_graph_indicator.txt, DS_graph_labels.txt and the
/// optional DS_node_labels.txt from `directory`.
GraphSet parse_tu_dataset(const std::filesystem::path& directory, const std::string& name);

/// Writes a GraphSet in TU format. Features that are exact one-hot rows are
/// written back as node labels; anything else is dropped (constant feature).
void write_tu_dataset(const GraphSet& set, const std::filesystem::path& directory);

enum class Motif { triangle, star, cycle4, clique4 };

Motif parse_motif(const std::string& name);
std::string motif_name(Motif motif);
/// Number of nodes the motif occupies.
std::size_t motif_size(Motif motif);

struct SyntheticSpec {
  std::vector<Motif> class_motifs{Motif::triangle, Motif::star};
  std::size_t graphs_per_class = 100;
  std::size_t min_nodes = 20;
  std::size_t max_nodes = 40;
  double noise_edge_probability = 0.0;
};

/// Background graph = random Hamiltonian path plus Erdos-Renyi noise edges,
/// with the class motif planted on random distinct nodes. Node features are
/// the constant 1.0. Deterministic in (spec, seed).
GraphSet make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Replaces every graph's features with a one-hot of its node degree (count
/// of nonzero off-diagonal entries), capped at `max_degree`. F = max_degree+1.
void use_degree_features(GraphSet& set, std::size_t max_degree);

Batch batch_graphs(std::span<const GraphInstance> graphs);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified shuffled k-fold partition. Test folds are disjoint, cover every
/// index, and their sizes differ by at most one.
std::vector<Fold> kfold_split(const GraphSet& set, std::size_t k, std::uint64_t seed);

/// `name,N,E,label` CSV with a header row.
std::string summary_csv(const GraphSet& set);

}  // namespace dotin

#endif  // DOTIN_GRAPH_HPP
