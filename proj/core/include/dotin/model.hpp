#ifndef DOTIN_MODEL_HPP
#define DOTIN_MODEL_HPP

// The stacked model: input projection, L propagation layers each optionally
// followed by a drop stage, a node-wise output projection and one head per
// task read off that task's virtual row.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dotin/autodiff.hpp"
#include "dotin/backbone.hpp"
#include "dotin/drop.hpp"
#include "dotin/graph.hpp"
#include "dotin/optim.hpp"

namespace dotin {

enum class TaskKind { classification, ged };

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::classification;
  std::size_t num_classes = 0;  ///< classification only
  double margin = 1.0;          ///< ged only
};

enum class DropStrategy { dotin, random, none };
enum class LambdaSource { attentiveness, logits };

DropStrategy parse_strategy(const std::string& name);
std::string strategy_name(DropStrategy strategy);

struct ModelSpec {
  BackboneKind backbone = BackboneKind::gat;
  std::size_t in_features = 1;
  std::size_t hidden = 64;
  std::size_t att_dim = 0;  ///< 0 means `hidden`
  std::size_t heads = 1;
  std::size_t layers = 3;
  std::vector<double> alpha;  ///< per-layer drop ratio; empty means no dropping
  std::vector<TaskSpec> tasks;
  Activation activation = Activation::elu;
  bool edge_weight_prior = false;
  LambdaSource lambda_source = LambdaSource::attentiveness;
  DropStrategy strategy = DropStrategy::dotin;
  double dropout = 0.0;

  [[nodiscard]] std::size_t num_virtual() const { return tasks.size(); }
  [[nodiscard]] std::size_t attention_dim() const { return att_dim == 0 ? hidden : att_dim; }
  [[nodiscard]] double alpha_at(std::size_t layer) const;
  /// SpecError on an inconsistent spec.
  void validate() const;

  /// Uniform alpha at every layer but the last.
  static std::vector<double> default_schedule(std::size_t layers, double alpha);
};

/// Chooses which of the stage's non-virtual rows to drop.
using DropSelector =
    std::function<std::vector<std::size_t>(std::span<const double> scores, std::size_t count)>;

struct ForwardOptions {
  bool training = false;
  /// Needed when training with dropout or when the strategy is random.
  std::mt19937_64* rng = nullptr;
  /// Replaces the strategy's selection step when set.
  DropSelector selector;
  /// Keeps each layer's augmented input in ForwardResult::layer_inputs.
  bool keep_layer_inputs = false;
};

struct StageRecord {
  std::size_t layer = 0;
  std::size_t nonvirtual_before = 0;
  std::size_t rows_after = 0;
  std::vector<long long> origins;  ///< origin per scored row (-1 for fused)
  DropPlan plan;
};

struct ForwardResult {
  std::vector<Var> embeddings;  ///< per task, 1 x hidden
  std::vector<Var> outputs;     ///< per task: logits (classification) or embedding (ged)
  AugmentedGraph final_graph;
  std::vector<StageRecord> stages;
  std::vector<AugmentedGraph> layer_inputs;
};

/// Parameters of one model bound onto a tape, grouped by role.
struct BoundModel {
  std::vector<Var> all;
  Var input_weight;
  Var virtual_bank;
  std::vector<GatLayerParams> gat;
  std::vector<GcnLayerParams> gcn;
  std::vector<Var> score_w1;  ///< gcn backbone only
  std::vector<Var> score_w2;
  Var output_weight;
  std::vector<Var> head_weight;  ///< invalid Var for ged tasks
  std::vector<Var> head_bias;
};

class DotinModel {
 public:
  DotinModel(ModelSpec spec, std::uint64_t seed);

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] ParameterStore& params() { return params_; }
  [[nodiscard]] const ParameterStore& params() const { return params_; }

  [[nodiscard]] BoundModel bind(Tape& tape) const;

  ForwardResult forward(const BoundModel& bound, const GraphInstance& graph,
                        const ForwardOptions& options = {}) const;

 private:
  ModelSpec spec_;
  ParameterStore params_;
};

/// Convenience wrapper: bind on `tape`, then forward.
ForwardResult dotin_forward(const DotinModel& model, Tape& tape, const GraphInstance& graph,
                            const ForwardOptions& options = {});

}  // namespace dotin

#endif  // DOTIN_MODEL_HPP
