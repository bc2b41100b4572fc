#ifndef DOTIN_COST_MODEL_HPP
#define DOTIN_COST_MODEL_HPP

// Analytic cost accounting for one forward pass. Counts are exact integers
// derived from loop bounds; nothing is sampled.
//
//   dense m x k by k x n product   2mkn
//   softmax over m entries         4m   (max, exp, sum, divide)
//   elementwise op over m entries  m
//   sorting m scores               m * ceil(log2 m)
//
// Activation elements approximate memory: every tensor a layer keeps alive
// for the backward pass (features, projections, attention logits and
// weights). All stages stay live until backward starts, so the peak is the
// running total at the last stage.

#include <cstdint>
#include <vector>

#include "dotin/graph.hpp"
#include "dotin/model.hpp"

namespace dotin {

struct StageCost {
  std::size_t layer = 0;         ///< layers index, or layers for the output stage
  std::size_t rows = 0;          ///< rows entering the stage, virtual rows included
  std::size_t nonvirtual = 0;
  std::size_t dropped = 0;
  std::uint64_t flops = 0;
  std::uint64_t retained_elements = 0;
};

struct CostBreakdown {
  std::vector<StageCost> stages;  ///< input projection, one per layer, output
  std::uint64_t flops = 0;
  std::uint64_t peak_activation_elements = 0;
};

std::uint64_t linear_flops(std::uint64_t rows, std::uint64_t in, std::uint64_t out);

CostBreakdown cost_breakdown(const ModelSpec& spec, std::size_t num_nodes);

std::uint64_t flop_count(const ModelSpec& spec, std::size_t num_nodes);
std::uint64_t flop_count(const ModelSpec& spec, const GraphInstance& graph);
/// Sum over the batch's graphs.
std::uint64_t flop_count(const ModelSpec& spec, const Batch& batch);

std::uint64_t peak_activation_elements(const ModelSpec& spec, std::size_t num_nodes);
std::uint64_t peak_activation_elements(const ModelSpec& spec, const GraphInstance& graph);
/// Sum over the batch's graphs: they share one tape, so all are live at once.
std::uint64_t peak_activation_elements(const ModelSpec& spec, const Batch& batch);

}  // namespace dotin

#endif  // DOTIN_COST_MODEL_HPP
