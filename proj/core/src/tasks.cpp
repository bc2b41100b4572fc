#include "dotin/tasks.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "dotin/errors.hpp"

namespace dotin {
namespace {

using Pair = std::pair<std::size_t, std::size_t>;

std::vector<Pair> sample_pairs(const std::vector<Pair>& pool, std::size_t count,
                               std::mt19937_64& rng) {
  std::vector<Pair> picked;
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    picked.push_back(pool[idx[i]]);
  }
  return picked;
}

GraphInstance substitute(const GraphInstance& graph, const std::vector<Pair>& edges,
                         const std::vector<Pair>& non_edges, std::size_t k, std::mt19937_64& rng) {
  GraphInstance out = graph;
  for (const auto& [i, j] : sample_pairs(edges, k, rng)) {
    out.adjacency(i, j) = 0.0;
    out.adjacency(j, i) = 0.0;
  }
  for (const auto& [i, j] : sample_pairs(non_edges, k, rng)) {
    out.adjacency(i, j) = 1.0;
    out.adjacency(j, i) = 1.0;
  }
  return out;
}

}  // namespace

Var classification_loss(Var embedding, Var head_weight, Var head_bias, std::size_t label) {
  return cross_entropy(add_row_bias(matmul(embedding, head_weight), head_bias), label);
}

Var multitask_loss(std::span<const Var> losses) {
  if (losses.empty()) throw SpecError("multitask_loss: no task losses");
  return mean_of(losses);
}

double multitask_loss(std::span<const double> losses) {
  if (losses.empty()) throw SpecError("multitask_loss: no task losses");
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

GedTriplet gen_ged_triplet(const GraphInstance& graph, std::size_t k_p, std::size_t k_n,
                           std::uint64_t seed) {
  if (k_p < 1 || k_p >= k_n) {
    throw GenerationError("ged triplet needs 1 <= k_p < k_n, got k_p=" + std::to_string(k_p) +
                          " k_n=" + std::to_string(k_n));
  }
  const std::size_t n = graph.num_nodes();
  std::vector<Pair> edges;
  std::vector<Pair> non_edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (graph.adjacency(i, j) != 0.0 || graph.adjacency(j, i) != 0.0) {
        edges.emplace_back(i, j);
      } else {
        non_edges.emplace_back(i, j);
      }
    }
  }
  if (edges.size() < k_n || non_edges.size() < k_n) {
    throw GenerationError("ged triplet needs " + std::to_string(k_n) + " edges and non-edges, graph has " +
                          std::to_string(edges.size()) + " and " + std::to_string(non_edges.size()));
  }
  std::mt19937_64 rng(seed);
  GedTriplet t;
  t.anchor = graph;
  t.positive = substitute(graph, edges, non_edges, k_p, rng);
  t.negative = substitute(graph, edges, non_edges, k_n, rng);
  t.k_p = k_p;
  t.k_n = k_n;
  return t;
}

Var ged_margin_loss(Var anchor, Var positive, Var negative, double gamma) {
  Var d_pos = squared_norm(sub(anchor, positive));
  Var d_neg = squared_norm(sub(anchor, negative));
  Var gap = add(sub(d_pos, d_neg), anchor.tape().constant(Tensor::scalar(gamma)));
  return relu(gap);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("squared_distance: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
  return total;
}

double ged_margin_loss(std::span<const double> anchor, std::span<const double> positive,
                       std::span<const double> negative, double gamma) {
  return std::max(0.0, gamma + squared_distance(anchor, positive) -
                           squared_distance(anchor, negative));
}

double pair_auc(std::span<const double> similarities, const std::vector<bool>& similar) {
  if (similarities.size() != similar.size()) {
    throw DimensionError("pair_auc: scores and labels differ in length");
  }
  const std::size_t n = similarities.size();
  const auto n_pos = static_cast<std::size_t>(std::count(similar.begin(), similar.end(), true));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw MetricError("pair_auc: both classes must be present");

  // Rank-sum form of the Mann-Whitney statistic; tied groups share the mean rank.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return similarities[a] < similarities[b]; });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && similarities[order[j]] == similarities[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t)
      if (similar[order[t]]) positive_rank_sum += mean_rank;
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double triplet_accuracy(std::span<const std::pair<double, double>> distances) {
  if (distances.empty()) throw MetricError("triplet_accuracy: no triplets");
  const auto correct = std::count_if(distances.begin(), distances.end(),
                                     [](const auto& d) { return d.first < d.second; });
  return static_cast<double>(correct) / static_cast<double>(distances.size());
}

}  // namespace dotin
