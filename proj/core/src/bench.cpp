#include "dotin/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "dotin/cost_model.hpp"
#include "dotin/errors.hpp"

namespace dotin {
namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string headline_metric(const ModelSpec& spec) {
  const TaskSpec& first = spec.tasks.front();
  return first.name + (first.kind == TaskKind::classification ? ".accuracy" : ".triplet_accuracy");
}

// Descending by score, ties by index; rank 1 is the largest.
std::vector<std::size_t> ranks_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> rank(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
  return rank;
}

void normalize_rows(Tensor& t) {
  for (std::size_t i = 0; i < t.rows(); ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < t.cols(); ++j) norm += t(i, j) * t(i, j);
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (std::size_t j = 0; j < t.cols(); ++j) t(i, j) /= norm;
  }
}

}  // namespace

std::string bench_csv(std::span<const BenchRecord> records) {
  std::ostringstream out;
  out << kBenchCsvHeader << std::setprecision(10);
  for (const auto& r : records) {
    out << r.fingerprint << ',' << r.strategy << ',' << r.drop_ratio << ',' << r.seed << ','
        << r.layers << ',' << r.hidden << ',' << r.batch_size << ',' << r.flops_per_batch << ','
        << r.peak_activation_elements << ',' << r.batches_per_sec << ',' << r.accuracy << '\n';
  }
  return out.str();
}

std::string config_fingerprint(const TrainConfig& config) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.to_config().dump());
  return out.str();
}

double measure_throughput(const DotinModel& model, std::span<const Batch> batches,
                          const TrainConfig& config, const TimingOptions& timing) {
  if (batches.empty()) throw SpecError("measure_throughput needs at least one batch");
  if (timing.timed_batches == 0 || timing.repeats == 0) {
    throw SpecError("measure_throughput needs timed batches and repeats");
  }
  DotinModel copy = model;
  AdamOptions adam;
  adam.lr = config.lr;
  adam.weight_decay = config.weight_decay;
  AdamState state = make_adam_state(copy.params().values(), adam);
  std::mt19937_64 rng(config.seed);

  auto run = [&](std::size_t steps) {
    for (std::size_t s = 0; s < steps; ++s) {
      train_epoch(copy, batches.subspan(s % batches.size(), 1), config, state, rng);
    }
  };
  run(timing.warmup_batches);
  std::vector<double> rates;
  for (std::size_t r = 0; r < timing.repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    run(timing.timed_batches);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rates.push_back(static_cast<double>(timing.timed_batches) / seconds);
  }
  std::sort(rates.begin(), rates.end());
  return rates[rates.size() / 2];
}

std::vector<BenchRecord> sweep_drop_ratio(const TrainConfig& base, std::span<const double> ratios,
                                          const GraphSet& data, const SweepOptions& options) {
  for (double r : ratios) {
    if (!(r >= 0.0 && r < 1.0)) throw SpecError("drop ratios must lie in [0, 1)");
  }
  for (const auto& s : options.strategies) (void)parse_strategy(s);

  std::vector<BenchRecord> records;
  for (double ratio : ratios) {
    const std::vector<std::string> strategies =
        ratio == 0.0 ? std::vector<std::string>{"none"} : options.strategies;
    for (const auto& strategy : strategies) {
      for (std::uint64_t seed : options.seeds) {
        TrainConfig config = base;
        config.seed = seed;
        config.alpha_schedule.clear();
        config.strategy = strategy == "none" ? "dotin" : strategy;
        config.alpha = strategy == "none" ? 0.0 : ratio;

        const auto folds = kfold_split(data, config.folds, seed);
        TrainedFold trained =
            train_and_evaluate(config, data, folds.front().train, folds.front().test, seed);
        const ModelSpec& spec = trained.model.spec();

        BenchRecord rec;
        rec.fingerprint = config_fingerprint(config);
        rec.strategy = strategy;
        rec.drop_ratio = ratio;
        rec.seed = seed;
        rec.layers = config.layers;
        rec.hidden = config.hidden;
        rec.batch_size = config.effective_batch_size();
        rec.accuracy = trained.report.test.metrics.at(headline_metric(spec));

        std::mt19937_64 rng(seed);
        const auto train_graphs = data.subset(folds.front().train);
        const auto batches = make_batches(train_graphs, rec.batch_size, rng);
        // Per-batch costs are averaged over the epoch's batches.
        std::uint64_t flops = 0;
        std::uint64_t peak = 0;
        for (const auto& b : batches) {
          flops += flop_count(spec, b);
          peak = std::max(peak, peak_activation_elements(spec, b));
        }
        rec.flops_per_batch = flops / batches.size();
        rec.peak_activation_elements = peak;
        if (options.measure_timing) {
          rec.batches_per_sec = measure_throughput(trained.model, batches, config, options.timing);
        }
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

double spearman(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw DimensionError("spearman: rank vectors differ in length");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    d2 += d * d;
  }
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

AttentivenessRanks export_attentiveness_ranks(const DotinModel& model,
                                              std::span<const GraphInstance> graphs) {
  const ModelSpec& spec = model.spec();
  const std::size_t k = spec.num_virtual();
  if (k < 2) throw SpecError("attentiveness ranks need at least two virtual nodes");
  const ParameterStore& p = model.params();

  // First-layer projections; heads are averaged as in the drop stage.
  std::vector<std::pair<const Tensor*, const Tensor*>> projections;
  if (spec.backbone == BackboneKind::gat) {
    for (std::size_t h = 0; h < spec.heads; ++h) {
      const std::string prefix = "layer0.head" + std::to_string(h);
      projections.emplace_back(&p.value(prefix + ".w1"), &p.value(prefix + ".w2"));
    }
  } else {
    projections.emplace_back(&p.value("layer0.score.w1"), &p.value("layer0.score.w2"));
  }

  AttentivenessRanks out;
  std::ostringstream csv;
  csv << "graph_id,node_id";
  for (std::size_t t = 0; t < k; ++t) csv << ",rank_task" << (t + 1);
  csv << '\n';
  const Tensor& bank = p.value("virtual.embeddings");
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const Tensor raw = matmul(graphs[g].features, p.value("input.weight"));
    const std::size_t n = raw.rows();
    Tensor scores(k, n);
    for (const auto& [w1, w2] : projections) {
      Tensor q = matmul(bank, *w1);
      Tensor key = matmul(raw, *w2);
      normalize_rows(q);
      normalize_rows(key);
      const Tensor s = matmul_transposed_b(q, key);
      for (std::size_t i = 0; i < s.size(); ++i) scores.data()[i] += s.data()[i];
    }
    std::vector<std::vector<std::size_t>> ranks;
    for (std::size_t t = 0; t < k; ++t) ranks.push_back(ranks_descending(scores.row(t)));
    for (std::size_t i = 0; i < n; ++i) {
      csv << g << ',' << i;
      for (std::size_t t = 0; t < k; ++t) csv << ',' << ranks[t][i];
      csv << '\n';
    }
    out.spearman.push_back(spearman(ranks[0], ranks[1]));
  }
  out.csv = csv.str();
  return out;
}

std::string export_drop_plans(const DotinModel& model, std::span<const GraphInstance> graphs,
                              std::uint64_t seed) {
  std::string csv = kDropPlanCsvHeader;
  std::mt19937_64 rng(seed);
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    Tape tape;
    ForwardOptions options;
    options.rng = &rng;
    const ForwardResult result = dotin_forward(model, tape, graphs[g], options);
    for (std::size_t s = 0; s < result.stages.size(); ++s) {
      csv += drop_plan_csv_rows(g, result.stages[s].layer, result.stages[s].plan,
                                result.stages[s].origins);
    }
  }
  return csv;
}

}  // namespace dotin
