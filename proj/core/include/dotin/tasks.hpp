#ifndef DOTIN_TASKS_HPP
#define DOTIN_TASKS_HPP

// Graph-level objectives and metrics: classification, the multi-task mean,
// GED triplets with a squared-distance margin loss, pair AUC and triplet
// accuracy.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dotin/autodiff.hpp"
#include "dotin/graph.hpp"

namespace dotin {

/// Cross-entropy of (embedding W + b) against `label`. IndexError when the
/// label is outside the head's class range.
Var classification_loss(Var embedding, Var head_weight, Var head_bias, std::size_t label);

/// Arithmetic mean of per-task losses. SpecError for an empty list.
Var multitask_loss(std::span<const Var> losses);
double multitask_loss(std::span<const double> losses);

struct GedTriplet {
  GraphInstance anchor;
  GraphInstance positive;
  GraphInstance negative;
  std::size_t k_p = 0;
  std::size_t k_n = 0;
};

/// Positive and negative each apply k_p / k_n edge substitutions to a copy of
/// `graph`: a substitution removes an existing edge and adds an absent one.
/// Removed edges are distinct original edges and added edges are distinct
/// original non-edges, so the edge-set symmetric difference is exactly 2k.
/// GenerationError when 1 <= k_p < k_n does not hold or the graph has too
/// few edges or non-edges.
GedTriplet gen_ged_triplet(const GraphInstance& graph, std::size_t k_p, std::size_t k_n,
                           std::uint64_t seed);

/// max(0, gamma + |a - p|^2 - |a - n|^2)
Var ged_margin_loss(Var anchor, Var positive, Var negative, double gamma);
double ged_margin_loss(std::span<const double> anchor, std::span<const double> positive,
                       std::span<const double> negative, double gamma);

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Mann-Whitney AUC: the fraction of (similar, dissimilar) pairs where the
/// similar pair scores higher, ties counting one half. MetricError unless
/// both classes are present.
double pair_auc(std::span<const double> similarities, const std::vector<bool>& similar);

/// Fraction of (d_pos, d_neg) with d_pos < d_neg; ties are wrong.
double triplet_accuracy(std::span<const std::pair<double, double>> distances);

}  // namespace dotin

#endif  // DOTIN_TASKS_HPP
