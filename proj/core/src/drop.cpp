#include "dotin/drop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dotin/errors.hpp"

namespace dotin {

std::size_t AugmentedGraph::num_virtual() const {
  return static_cast<std::size_t>(std::count_if(
      tags.begin(), tags.end(), [](const RowTag& t) { return t.kind == RowKind::virtual_node; }));
}

std::vector<std::size_t> AugmentedGraph::virtual_rows() const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < tags.size(); ++i)
    if (tags[i].kind == RowKind::virtual_node) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> AugmentedGraph::nonvirtual_rows() const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < tags.size(); ++i)
    if (tags[i].kind != RowKind::virtual_node) rows.push_back(i);
  return rows;
}

Tensor connect_virtuals(const Tensor& nonvirtual_adjacency, std::size_t k) {
  const std::size_t n = nonvirtual_adjacency.rows();
  Tensor out(n + k, n + k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = nonvirtual_adjacency(i, j);
  for (std::size_t v = n; v < n + k; ++v) {
    for (std::size_t i = 0; i < n; ++i) {
      out(v, i) = 1.0;
      out(i, v) = 1.0;
    }
  }
  return out;
}

AugmentedGraph inject_virtual_nodes(Var raw_features, const Tensor& adjacency, Var bank) {
  if (raw_features.rows() == 0) throw SpecError("inject_virtual_nodes: graph has no nodes");
  if (bank.rows() == 0) throw SpecError("inject_virtual_nodes: empty virtual-node bank");
  if (bank.cols() != raw_features.cols()) {
    throw DimensionError("inject_virtual_nodes: bank " + bank.shape().str() + " vs features " +
                         raw_features.shape().str());
  }
  if (adjacency.rows() != raw_features.rows() || adjacency.cols() != raw_features.rows()) {
    throw DimensionError("inject_virtual_nodes: adjacency " + adjacency.shape().str() +
                         " vs features " + raw_features.shape().str());
  }
  const std::size_t n = raw_features.rows();
  const std::size_t k = bank.rows();
  AugmentedGraph g;
  const Var parts[] = {raw_features, bank};
  g.features = concat_rows(parts);
  g.adjacency = connect_virtuals(adjacency, k);
  g.tags.reserve(n + k);
  for (std::size_t i = 0; i < n; ++i) g.tags.push_back({RowKind::raw, static_cast<long long>(i), 0});
  for (std::size_t t = 0; t < k; ++t) g.tags.push_back({RowKind::virtual_node, -1, t});
  return g;
}

Var attentiveness_logits(Var q_virtual, Var key_raw) {
  if (q_virtual.cols() != key_raw.cols()) {
    throw DimensionError("attentiveness: projections " + q_virtual.shape().str() + " and " +
                         key_raw.shape().str() + " disagree");
  }
  return matmul_transposed_b(sum_rows(q_virtual), key_raw);
}

Var attentiveness(Var q_virtual, Var key_raw, double tau) {
  if (key_raw.rows() == 0) throw EmptySupportError("attentiveness: no raw nodes to score");
  Var logits = attentiveness_logits(q_virtual, key_raw);
  return masked_softmax_rows(logits, Tensor(1, logits.cols(), 1.0), tau);
}

std::size_t drop_count(std::size_t n, double alpha) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * alpha));
}

std::size_t remaining_count(std::size_t n, double alpha, std::size_t k) {
  const std::size_t dropped = drop_count(n, alpha);
  if (dropped == 0) return n + k;
  // ceil(n(1 - alpha) + k) + 1 == (n - floor(n alpha)) + k + 1 for integer n, k;
  // the integer form avoids rounding drift in n * (1 - alpha).
  return n - dropped + k + 1;
}

std::vector<std::size_t> smallest_indices(std::span<const double> scores, std::size_t count) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  count = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
                    });
  order.resize(count);
  return order;
}

std::vector<std::size_t> random_indices(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  count = std::min(count, n);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

DropPlan make_drop_plan(std::span<const double> scores, std::vector<std::size_t> dropped,
                        std::span<const double> lambda_source) {
  if (lambda_source.size() != scores.size()) {
    throw DimensionError("make_drop_plan: lambda source and scores differ in length");
  }
  DropPlan plan;
  plan.scores.assign(scores.begin(), scores.end());
  plan.drop_count = dropped.size();
  std::vector<bool> is_dropped(scores.size(), false);
  for (std::size_t i : dropped) {
    if (i >= scores.size() || is_dropped[i]) {
      throw IndexError("make_drop_plan: invalid or repeated drop index " + std::to_string(i));
    }
    is_dropped[i] = true;
  }
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!is_dropped[i]) plan.kept.push_back(i);
  if (!dropped.empty()) {
    std::vector<double> source;
    source.reserve(dropped.size());
    for (std::size_t i : dropped) source.push_back(lambda_source[i]);
    plan.lambda = softmax(source);
  }
  plan.dropped = std::move(dropped);
  return plan;
}

DropPlan select_drop(std::span<const double> scores, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("select_drop: alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  return make_drop_plan(scores, smallest_indices(scores, drop_count(scores.size(), alpha)), scores);
}

std::vector<double> fuse_dropped(const Tensor& x_dropped, std::span<const double> lambda) {
  if (x_dropped.rows() == 0) throw SpecError("fuse_dropped: empty drop set");
  if (lambda.size() != x_dropped.rows()) {
    throw DimensionError("fuse_dropped: " + std::to_string(lambda.size()) + " weights for " +
                         std::to_string(x_dropped.rows()) + " rows");
  }
  std::vector<double> out(x_dropped.cols(), 0.0);
  for (std::size_t i = 0; i < x_dropped.rows(); ++i)
    for (std::size_t c = 0; c < x_dropped.cols(); ++c) out[c] += lambda[i] * x_dropped(i, c);
  return out;
}

Var fuse_dropped(Var x_dropped, Var lambda) {
  if (x_dropped.rows() == 0) throw SpecError("fuse_dropped: empty drop set");
  if (lambda.rows() != 1 || lambda.cols() != x_dropped.rows()) {
    throw DimensionError("fuse_dropped: lambda " + lambda.shape().str() + " vs rows " +
                         x_dropped.shape().str());
  }
  return matmul(lambda, x_dropped);
}

Tensor rewire_edges(const Tensor& nonvirtual_adjacency, const DropPlan& plan) {
  const Tensor& a = nonvirtual_adjacency;
  if (a.rows() != a.cols() || a.rows() != plan.scores.size()) {
    throw DimensionError("rewire_edges: adjacency " + a.shape().str() + " vs plan over " +
                         std::to_string(plan.scores.size()) + " nodes");
  }
  if (plan.empty()) throw SpecError("rewire_edges: plan drops nothing");
  const std::size_t m = plan.kept.size();
  Tensor out(m + 1, m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t src = plan.kept[i];
    for (std::size_t j = 0; j < m; ++j) out(i, j) = a(src, plan.kept[j]);
    double to_fused = 0.0;
    double from_fused = 0.0;
    for (std::size_t d : plan.dropped) {
      to_fused += a(src, d);
      from_fused += a(d, src);
    }
    out(i, m) = to_fused;
    out(m, i) = from_fused;
  }
  for (std::size_t r = 0; r <= m; ++r) {
    auto row = out.row(r);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < row.size(); ++c)
      if (c != r && row[c] > 0.0) peak = std::max(peak, row[c]);
    if (peak == -std::numeric_limits<double>::infinity()) continue;  // isolated row
    double total = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c != r && row[c] > 0.0) {
        row[c] = std::exp(row[c] - peak);
        total += row[c];
      } else {
        row[c] = 0.0;
      }
    }
    for (double& v : row) v /= total;
  }
  return out;
}

Tensor gcn_virtual_degeneracy_probe(std::size_t n_kept, const Tensor& virtuals,
                                    const Tensor& nonvirtual) {
  if (virtuals.rows() < 2) throw SpecError("degeneracy probe needs at least two virtual rows");
  if (nonvirtual.rows() != n_kept + 1 || nonvirtual.cols() != virtuals.cols()) {
    throw DimensionError("degeneracy probe: expected " + std::to_string(n_kept + 1) + " x " +
                         std::to_string(virtuals.cols()) + " non-virtual rows, got " +
                         nonvirtual.shape().str());
  }
  std::vector<double> total(virtuals.cols(), 0.0);
  for (std::size_t i = 0; i < nonvirtual.rows(); ++i)
    for (std::size_t c = 0; c < nonvirtual.cols(); ++c) total[c] += nonvirtual(i, c);
  const double denom = 2.0 + static_cast<double>(n_kept);
  Tensor out(virtuals.rows(), virtuals.cols());
  for (std::size_t k = 0; k < virtuals.rows(); ++k)
    for (std::size_t c = 0; c < virtuals.cols(); ++c) out(k, c) = (total[c] + virtuals(k, c)) / denom;
  return out;
}

std::string drop_plan_csv_rows(std::size_t graph_id, std::size_t stage, const DropPlan& plan,
                               std::span<const long long> origins) {
  if (origins.size() != plan.scores.size()) {
    throw DimensionError("drop_plan_csv_rows: origin map does not match the plan");
  }
  std::vector<bool> dropped(plan.scores.size(), false);
  for (std::size_t i : plan.dropped) dropped[i] = true;
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < plan.scores.size(); ++i) {
    out << graph_id << ',' << stage << ',' << origins[i] << ',' << plan.scores[i] << ','
        << (dropped[i] ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace dotin
