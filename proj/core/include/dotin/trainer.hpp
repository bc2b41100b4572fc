#ifndef DOTIN_TRAINER_HPP
#define DOTIN_TRAINER_HPP

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dotin/config.hpp"
#include "dotin/graph.hpp"
#include "dotin/model.hpp"
#include "dotin/optim.hpp"

namespace dotin {

/// Everything a run needs. Built from a flat config; see config_help().
struct TrainConfig {
  // model
  std::string backbone = "gat";
  std::size_t layers = 3;
  std::size_t hidden = 64;
  std::size_t att_dim = 0;
  std::size_t heads = 1;
  double alpha = 0.0;
  std::vector<double> alpha_schedule;  ///< overrides `alpha` when nonempty
  std::vector<std::string> tasks{"cls"};
  std::string activation = "elu";
  bool edge_weight_prior = false;
  std::string lambda_source = "attentiveness";
  std::string strategy = "dotin";

  // optimisation
  double lr = 1e-3;
  std::size_t batch_size = 0;  ///< 0: 8 for one task, 16 for multi-task
  double weight_decay = 8e-4;
  // Unset means "auto": classification-only runs use 50 epochs, patience 10
  // and dropout 0.2; runs with a ged task use 100 epochs, no early stop and no
  // dropout, since independent dropout masks on the three triplet passes swamp
  // the few-edit distance signal and the ged loss sits on a plateau before it
  // starts to fall.
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> early_stop_patience;
  double early_stop_delta = 1e-4;
  std::optional<double> dropout;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // ged
  std::size_t ged_kp = 1;
  std::size_t ged_kn = 2;
  double ged_margin = 1.0;
  std::size_t ged_eval_triplets = 10;  ///< triplets drawn per test graph

  // data
  std::string data_source = "synthetic";
  std::string data_dir;
  std::string data_name;
  SyntheticSpec synthetic;
  std::uint64_t data_seed = 7;
  /// auto: degree one-hot for synthetic data, ingested features for TU.
  std::string features = "auto";
  std::size_t max_degree = 8;

  /// ConfigError for unknown keys or out-of-range values.
  static TrainConfig from_config(const Config& config);
  [[nodiscard]] Config to_config() const;

  [[nodiscard]] bool has_ged() const;
  [[nodiscard]] std::size_t effective_batch_size() const;
  [[nodiscard]] std::size_t effective_epochs() const;
  [[nodiscard]] std::size_t effective_patience() const;
  [[nodiscard]] double effective_dropout() const;
  [[nodiscard]] std::vector<double> effective_schedule() const;
  [[nodiscard]] ModelSpec model_spec(const GraphSet& data) const;
};

/// One line per recognised key with its default and meaning.
std::string config_help();

GraphSet load_dataset(const TrainConfig& config);

struct EpochStats {
  double mean_loss = 0.0;
  double batches_per_sec = 0.0;
  std::size_t batches = 0;
};

/// Shuffles `graphs` and cuts them into batches of `batch_size`.
std::vector<Batch> make_batches(std::span<const GraphInstance> graphs, std::size_t batch_size,
                                std::mt19937_64& rng);

/// Per-graph objective: mean over the model's tasks (classification
/// cross-entropy, GED margin loss over a freshly generated triplet).
Var graph_objective(const DotinModel& model, const BoundModel& bound, const GraphInstance& graph,
                    const TrainConfig& config, bool training, std::mt19937_64& rng);

/// One optimisation pass: forward, backward and an Adam step per batch.
/// DivergenceError names the batch whose loss is not finite.
EpochStats train_epoch(DotinModel& model, std::span<const Batch> batches,
                       const TrainConfig& config, AdamState& optimizer, std::mt19937_64& rng);

struct MetricReport {
  std::map<std::string, double> metrics;
  std::vector<std::pair<double, double>> triplet_distances;  ///< (d_pos, d_neg)
};

/// Never mutates the model. Classification accuracy per classification task
/// ("<task>.accuracy"); GED "<task>.triplet_accuracy" and "<task>.pair_auc"
/// over triplets generated from `seed`. MetricError on an empty set.
MetricReport evaluate(const DotinModel& model, std::span<const GraphInstance> graphs,
                      const TrainConfig& config, std::uint64_t seed);

struct FoldReport {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<EpochStats> epochs;
  MetricReport test;
};

struct RunReport {
  std::vector<FoldReport> folds;
  /// metric -> (mean, sample standard deviation) over folds.
  std::map<std::string, std::pair<double, double>> aggregate;

  /// `fold,epoch,task,metric,value` with a header row. Timing is excluded.
  [[nodiscard]] std::string csv() const;
  [[nodiscard]] std::string summary() const;
};

std::map<std::string, std::pair<double, double>> aggregate_folds(
    std::span<const FoldReport> folds);

struct TrainedFold {
  FoldReport report;
  DotinModel model;
};

/// Trains a fresh model on `train` and evaluates it on `test`.
TrainedFold train_and_evaluate(const TrainConfig& config, const GraphSet& data,
                               std::span<const std::size_t> train, std::span<const std::size_t> test,
                               std::uint64_t seed);

/// Fresh model per fold; folds run on `config.threads` workers.
RunReport run_cross_validation(const TrainConfig& config, const GraphSet& data,
                               DotinModel* last_model = nullptr);

}  // namespace dotin

#endif  // DOTIN_TRAINER_HPP
