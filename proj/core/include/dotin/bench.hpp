#ifndef DOTIN_BENCH_HPP
#define DOTIN_BENCH_HPP

// Drop-ratio sweeps, training throughput measurement and attentiveness-rank
// exports.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dotin/graph.hpp"
#include "dotin/model.hpp"
#include "dotin/trainer.hpp"

namespace dotin {

struct BenchRecord {
  std::string fingerprint;  ///< hex FNV-1a of the effective config
  std::string strategy;
  double drop_ratio = 0.0;
  std::uint64_t seed = 0;
  std::size_t layers = 0;
  std::size_t hidden = 0;
  std::size_t batch_size = 0;
  std::uint64_t flops_per_batch = 0;
  std::uint64_t peak_activation_elements = 0;
  double batches_per_sec = 0.0;  ///< 0 when timing is off
  double accuracy = 0.0;         ///< first task's headline test metric
};

inline constexpr const char* kBenchCsvHeader =
    "fingerprint,strategy,drop_ratio,seed,layers,hidden,batch_size,flops_per_batch,"
    "peak_activation_elements,batches_per_sec,accuracy\n";

std::string bench_csv(std::span<const BenchRecord> records);

std::string config_fingerprint(const TrainConfig& config);

struct TimingOptions {
  std::size_t warmup_batches = 5;
  std::size_t timed_batches = 30;
  std::size_t repeats = 5;
};

/// Median over `repeats` runs of training batches/sec, each run covering
/// `timed_batches` optimisation steps (cycling through `batches`) on a
/// private copy of the model.
double measure_throughput(const DotinModel& model, std::span<const Batch> batches,
                          const TrainConfig& config, const TimingOptions& timing = {});

struct SweepOptions {
  std::vector<std::string> strategies{"dotin", "random", "none"};
  std::vector<std::uint64_t> seeds{0};
  bool measure_timing = false;
  TimingOptions timing;
};

/// One trained run per (ratio, strategy, seed): train on fold 0 of the
/// config's k-fold split and test on its held-out part. Ratio 0 yields a
/// single "none" record per seed. Ratios must lie in [0, 1).
std::vector<BenchRecord> sweep_drop_ratio(const TrainConfig& base, std::span<const double> ratios,
                                          const GraphSet& data, const SweepOptions& options = {});

struct AttentivenessRanks {
  std::string csv;  ///< graph_id,node_id,rank_task1,rank_task2[,...]
  std::vector<double> spearman;  ///< task 1 vs task 2 per graph; NaN below 2 nodes
};

/// Ranks raw nodes per task by first-layer attentiveness computed from
/// unit-normalised projections. Rank 1 is the most attentive node. SpecError
/// when the model has fewer than two virtual nodes.
AttentivenessRanks export_attentiveness_ranks(const DotinModel& model,
                                              std::span<const GraphInstance> graphs);

/// Drop plans of every stage of every graph, with kDropPlanCsvHeader.
std::string export_drop_plans(const DotinModel& model, std::span<const GraphInstance> graphs,
                              std::uint64_t seed);

/// Spearman correlation of two rank permutations.
double spearman(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace dotin

#endif  // DOTIN_BENCH_HPP
