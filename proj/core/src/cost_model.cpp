#include "dotin/cost_model.hpp"

#include <algorithm>
#include <bit>

#include "dotin/drop.hpp"

namespace dotin {
namespace {

using u64 = std::uint64_t;

u64 softmax_flops(u64 m) { return 4 * m; }

u64 sort_flops(u64 m) {
  if (m < 2) return 0;
  return m * static_cast<u64>(std::bit_width(m - 1));  // ceil(log2 m)
}

}  // namespace

u64 linear_flops(u64 rows, u64 in, u64 out) { return 2 * rows * in * out; }

CostBreakdown cost_breakdown(const ModelSpec& spec, std::size_t num_nodes) {
  spec.validate();
  const u64 d = spec.hidden;
  const u64 da = spec.attention_dim();
  const u64 heads = spec.heads;
  const u64 dh = d / heads;
  const u64 k = spec.num_virtual();

  CostBreakdown out;
  StageCost input;
  input.layer = 0;
  input.rows = num_nodes;
  input.nonvirtual = num_nodes;
  input.flops = linear_flops(num_nodes, spec.in_features, d);
  input.retained_elements = static_cast<u64>(num_nodes) * (spec.in_features + d) + k * d;
  out.stages.push_back(input);

  u64 n = num_nodes;
  for (std::size_t l = 0; l < spec.layers; ++l) {
    const u64 r = n + k;
    StageCost s;
    s.layer = l;
    s.rows = r;
    s.nonvirtual = n;
    if (spec.backbone == BackboneKind::gat) {
      const u64 per_head = 2 * linear_flops(r, d, da) + linear_flops(r, da, r) +
                           softmax_flops(r * r) + linear_flops(r, d, dh) + linear_flops(r, r, dh);
      s.flops = heads * per_head + r * d;  // + activation
      s.retained_elements = heads * (2 * r * da + 2 * r * r + 2 * r * dh) + r * d;
    } else {
      s.flops = 3 * r * r + linear_flops(r, d, d) + linear_flops(r, r, d) + r * d;
      s.retained_elements = r * r + 3 * r * d;
    }

    const double alpha = spec.alpha_at(l);
    const u64 dropped = alpha > 0.0 ? drop_count(n, alpha) : 0;
    if (dropped > 0) {
      const u64 kept = n - dropped;
      u64 score = 0;
      if (spec.backbone == BackboneKind::gat) {
        score = heads * (k * da + 2 * n * da) + (heads - 1) * n;
      } else {
        score = linear_flops(k, d, da) + linear_flops(n, d, da) + k * da + 2 * n * da;
        s.retained_elements += (k + n) * da;
      }
      s.flops += score + softmax_flops(n) + sort_flops(n) + softmax_flops(dropped) +
                 linear_flops(1, dropped, d) + kept * dropped + softmax_flops((kept + 1) * (kept + 1));
      s.retained_elements += 2 * n + dropped + (kept + 1 + k) * d;
      s.dropped = dropped;
      n = kept + 1;
    }
    out.stages.push_back(s);
  }

  const u64 r = n + k;
  StageCost output;
  output.layer = spec.layers;
  output.rows = r;
  output.nonvirtual = n;
  output.flops = linear_flops(r, d, d);
  output.retained_elements = r * d;
  for (const auto& task : spec.tasks) {
    if (task.kind == TaskKind::classification) {
      output.flops += linear_flops(1, d, task.num_classes) + task.num_classes;
      output.retained_elements += task.num_classes;
    }
  }
  out.stages.push_back(output);

  u64 live = 0;
  for (const auto& s : out.stages) {
    out.flops += s.flops;
    live += s.retained_elements;
    out.peak_activation_elements = std::max(out.peak_activation_elements, live);
  }
  return out;
}

u64 flop_count(const ModelSpec& spec, std::size_t num_nodes) {
  return cost_breakdown(spec, num_nodes).flops;
}

u64 flop_count(const ModelSpec& spec, const GraphInstance& graph) {
  return flop_count(spec, graph.num_nodes());
}

u64 flop_count(const ModelSpec& spec, const Batch& batch) {
  u64 total = 0;
  for (const auto& range : batch.ranges) total += flop_count(spec, range.size());
  return total;
}

u64 peak_activation_elements(const ModelSpec& spec, std::size_t num_nodes) {
  return cost_breakdown(spec, num_nodes).peak_activation_elements;
}

u64 peak_activation_elements(const ModelSpec& spec, const GraphInstance& graph) {
  return peak_activation_elements(spec, graph.num_nodes());
}

u64 peak_activation_elements(const ModelSpec& spec, const Batch& batch) {
  u64 total = 0;
  for (const auto& range : batch.ranges) total += peak_activation_elements(spec, range.size());
  return total;
}

}  // namespace dotin
