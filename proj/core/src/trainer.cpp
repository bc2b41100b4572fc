#include "dotin/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "dotin/errors.hpp"
#include "dotin/tasks.hpp"

namespace dotin {
namespace {

// splitmix64 finaliser; turns (seed, stream) pairs into independent seeds.
std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct KeyDoc {
  const char* key;
  const char* fallback;
  const char* meaning;
};

constexpr KeyDoc kKeys[] = {
    {"backbone", "gat", "propagation layer: gat or gcn"},
    {"layers", "3", "number of propagation layers"},
    {"hidden", "64", "hidden width D"},
    {"att_dim", "0", "attention width; 0 means hidden"},
    {"heads", "1", "attention heads (gat); must divide hidden"},
    {"alpha", "0", "drop ratio applied at every layer but the last"},
    {"alpha_schedule", "", "explicit per-layer drop ratios, overrides alpha"},
    {"tasks", "cls", "comma list of tasks: cls, ged"},
    {"activation", "elu", "layer activation: elu or identity"},
    {"edge_weight_prior", "false", "add log edge weight to attention logits"},
    {"lambda_source", "attentiveness", "fusion weights from attentiveness or logits"},
    {"strategy", "dotin", "node selection: dotin, random or none"},
    {"lr", "0.001", "Adam learning rate"},
    {"batch_size", "0", "graphs per batch; 0 means 8 (one task) or 16 (several)"},
    {"weight_decay", "0.0008", "decoupled weight decay"},
    {"epochs", "auto", "maximum epochs per fold; auto is 50, or 100 with a ged task"},
    {"early_stop_patience", "auto", "epochs without train-loss improvement before stopping; 0 disables; auto is 10, or 0 with a ged task"},
    {"early_stop_delta", "0.0001", "minimum train-loss improvement"},
    {"dropout", "auto", "feature dropout during training; auto is 0.2, or 0 with a ged task"},
    {"folds", "10", "cross-validation folds"},
    {"seed", "0", "run seed"},
    {"threads", "1", "folds trained concurrently"},
    {"ged_kp", "1", "edge substitutions for the positive graph"},
    {"ged_kn", "2", "edge substitutions for the negative graph"},
    {"ged_margin", "1", "triplet margin gamma"},
    {"ged_eval_triplets", "10", "triplets drawn per test graph at evaluation"},
    {"data.source", "synthetic", "synthetic or tu"},
    {"data.dir", "", "directory holding TU files"},
    {"data.name", "", "TU dataset name (file prefix)"},
    {"data.seed", "7", "synthetic generator seed"},
    {"features", "auto", "node features: auto, degree or ingested; auto is degree for synthetic data"},
    {"features.max_degree", "8", "degree one-hot cap"},
    {"synthetic.motifs", "triangle,star", "one planted motif per class"},
    {"synthetic.graphs_per_class", "100", "graphs per class"},
    {"synthetic.min_nodes", "20", "smallest graph"},
    {"synthetic.max_nodes", "40", "largest graph"},
    {"synthetic.noise", "0", "Erdos-Renyi noise edge probability"},
};

std::size_t get_count(const Config& c, std::string_view key, std::size_t fallback, std::size_t min) {
  const long long v = c.get_int(key, static_cast<long long>(fallback));
  if (v < static_cast<long long>(min)) {
    throw ConfigError("config key '" + std::string(key) + "' must be at least " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

// Keys whose default depends on the task list accept the literal "auto".
bool is_set(const Config& c, std::string_view key) {
  return c.has(key) && c.get_string(key, "") != "auto";
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

std::string join(const std::vector<double>& values) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::size_t argmax(const Tensor& row) {
  const auto v = row.values();
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

TrainConfig TrainConfig::from_config(const Config& c) {
  std::set<std::string, std::less<>> known;
  for (const auto& k : kKeys) known.insert(k.key);
  for (const auto& [key, value] : c.entries()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  TrainConfig t;
  t.backbone = c.get_string("backbone", t.backbone);
  if (t.backbone != "gat" && t.backbone != "gcn") {
    throw ConfigError("backbone must be gat or gcn, got '" + t.backbone + "'");
  }
  t.layers = get_count(c, "layers", t.layers, 1);
  t.hidden = get_count(c, "hidden", t.hidden, 1);
  t.att_dim = get_count(c, "att_dim", t.att_dim, 0);
  t.heads = get_count(c, "heads", t.heads, 1);
  t.alpha = c.get_double("alpha", t.alpha);
  t.alpha_schedule = c.get_doubles("alpha_schedule", {});
  t.tasks = c.get_strings("tasks", t.tasks);
  if (t.tasks.empty()) throw ConfigError("tasks must name at least one task");
  for (const auto& task : t.tasks) {
    if (task != "cls" && task != "ged") throw ConfigError("unknown task '" + task + "'");
  }
  if (std::set<std::string>(t.tasks.begin(), t.tasks.end()).size() != t.tasks.size()) {
    throw ConfigError("tasks must not repeat");
  }
  t.activation = c.get_string("activation", t.activation);
  t.edge_weight_prior = c.get_bool("edge_weight_prior", t.edge_weight_prior);
  t.lambda_source = c.get_string("lambda_source", t.lambda_source);
  if (t.lambda_source != "attentiveness" && t.lambda_source != "logits") {
    throw ConfigError("lambda_source must be attentiveness or logits");
  }
  t.strategy = c.get_string("strategy", t.strategy);
  t.lr = c.get_double("lr", t.lr);
  if (!(t.lr > 0.0)) throw ConfigError("lr must be positive");
  t.batch_size = get_count(c, "batch_size", t.batch_size, 0);
  t.weight_decay = c.get_double("weight_decay", t.weight_decay);
  if (t.weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
  if (is_set(c, "epochs")) t.epochs = get_count(c, "epochs", 0, 1);
  if (is_set(c, "early_stop_patience")) t.early_stop_patience = get_count(c, "early_stop_patience", 0, 0);
  t.early_stop_delta = c.get_double("early_stop_delta", t.early_stop_delta);
  if (is_set(c, "dropout")) t.dropout = c.get_double("dropout", 0.0);
  t.folds = get_count(c, "folds", t.folds, 2);
  t.seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
  t.threads = get_count(c, "threads", t.threads, 1);
  t.ged_kp = get_count(c, "ged_kp", t.ged_kp, 1);
  t.ged_kn = get_count(c, "ged_kn", t.ged_kn, 2);
  if (t.ged_kp >= t.ged_kn) throw ConfigError("ged_kp must be smaller than ged_kn");
  t.ged_margin = c.get_double("ged_margin", t.ged_margin);
  t.ged_eval_triplets = get_count(c, "ged_eval_triplets", t.ged_eval_triplets, 1);

  t.data_source = c.get_string("data.source", t.data_source);
  if (t.data_source != "synthetic" && t.data_source != "tu") {
    throw ConfigError("data.source must be synthetic or tu");
  }
  t.data_dir = c.get_string("data.dir", "");
  t.data_name = c.get_string("data.name", "");
  if (t.data_source == "tu" && (t.data_dir.empty() || t.data_name.empty())) {
    throw ConfigError("data.source = tu needs data.dir and data.name");
  }
  t.data_seed = static_cast<std::uint64_t>(c.get_int("data.seed", 7));
  t.features = c.get_string("features", t.features);
  if (t.features != "auto" && t.features != "degree" && t.features != "ingested") {
    throw ConfigError("features must be auto, degree or ingested");
  }
  t.max_degree = get_count(c, "features.max_degree", t.max_degree, 1);
  std::vector<std::string> motif_names;
  for (Motif m : t.synthetic.class_motifs) motif_names.push_back(motif_name(m));
  t.synthetic.class_motifs.clear();
  for (const auto& name : c.get_strings("synthetic.motifs", motif_names)) {
    try {
      t.synthetic.class_motifs.push_back(parse_motif(name));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  t.synthetic.graphs_per_class = get_count(c, "synthetic.graphs_per_class", 100, 1);
  t.synthetic.min_nodes = get_count(c, "synthetic.min_nodes", 20, 1);
  t.synthetic.max_nodes = get_count(c, "synthetic.max_nodes", 40, 1);
  t.synthetic.noise_edge_probability = c.get_double("synthetic.noise", 0.0);

  // Catch model-level inconsistencies here so they surface as config errors.
  try {
    (void)parse_strategy(t.strategy);
    (void)parse_activation(t.activation);
    ModelSpec probe;
    probe.backbone = parse_backbone(t.backbone);
    probe.hidden = t.hidden;
    probe.att_dim = t.att_dim;
    probe.heads = t.heads;
    probe.layers = t.layers;
    probe.alpha = t.effective_schedule();
    probe.dropout = t.effective_dropout();
    probe.tasks = {TaskSpec{"cls", TaskKind::classification, 2, 1.0}};
    probe.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return t;
}

Config TrainConfig::to_config() const {
  Config c;
  c.set("backbone", backbone);
  c.set("layers", std::to_string(layers));
  c.set("hidden", std::to_string(hidden));
  c.set("att_dim", std::to_string(att_dim));
  c.set("heads", std::to_string(heads));
  c.set("alpha", fmt(alpha));
  if (!alpha_schedule.empty()) c.set("alpha_schedule", join(alpha_schedule));
  c.set("tasks", join(tasks));
  c.set("activation", activation);
  c.set("edge_weight_prior", edge_weight_prior ? "true" : "false");
  c.set("lambda_source", lambda_source);
  c.set("strategy", strategy);
  c.set("lr", fmt(lr));
  c.set("batch_size", std::to_string(batch_size));
  c.set("weight_decay", fmt(weight_decay));
  if (epochs) c.set("epochs", std::to_string(*epochs));
  if (early_stop_patience) c.set("early_stop_patience", std::to_string(*early_stop_patience));
  c.set("early_stop_delta", fmt(early_stop_delta));
  if (dropout) c.set("dropout", fmt(*dropout));
  c.set("folds", std::to_string(folds));
  c.set("seed", std::to_string(seed));
  c.set("threads", std::to_string(threads));
  c.set("ged_kp", std::to_string(ged_kp));
  c.set("ged_kn", std::to_string(ged_kn));
  c.set("ged_margin", fmt(ged_margin));
  c.set("ged_eval_triplets", std::to_string(ged_eval_triplets));
  c.set("data.source", data_source);
  if (!data_dir.empty()) c.set("data.dir", data_dir);
  if (!data_name.empty()) c.set("data.name", data_name);
  c.set("data.seed", std::to_string(data_seed));
  c.set("features", features);
  c.set("features.max_degree", std::to_string(max_degree));
  std::vector<std::string> motifs;
  for (Motif m : synthetic.class_motifs) motifs.push_back(motif_name(m));
  c.set("synthetic.motifs", join(motifs));
  c.set("synthetic.graphs_per_class", std::to_string(synthetic.graphs_per_class));
  c.set("synthetic.min_nodes", std::to_string(synthetic.min_nodes));
  c.set("synthetic.max_nodes", std::to_string(synthetic.max_nodes));
  c.set("synthetic.noise", fmt(synthetic.noise_edge_probability));
  return c;
}

bool TrainConfig::has_ged() const { return std::ranges::find(tasks, "ged") != tasks.end(); }

std::size_t TrainConfig::effective_epochs() const { return epochs.value_or(has_ged() ? 100 : 50); }

std::size_t TrainConfig::effective_patience() const {
  return early_stop_patience.value_or(has_ged() ? 0 : 10);
}

double TrainConfig::effective_dropout() const { return dropout.value_or(has_ged() ? 0.0 : 0.2); }

std::size_t TrainConfig::effective_batch_size() const {
  if (batch_size != 0) return batch_size;
  return tasks.size() > 1 ? 16 : 8;
}

std::vector<double> TrainConfig::effective_schedule() const {
  if (!alpha_schedule.empty()) return alpha_schedule;
  if (alpha == 0.0) return {};
  return ModelSpec::default_schedule(layers, alpha);
}

ModelSpec TrainConfig::model_spec(const GraphSet& data) const {
  ModelSpec spec;
  spec.backbone = parse_backbone(backbone);
  spec.in_features = data.feature_dim;
  spec.hidden = hidden;
  spec.att_dim = att_dim;
  spec.heads = heads;
  spec.layers = layers;
  spec.alpha = effective_schedule();
  spec.activation = parse_activation(activation);
  spec.edge_weight_prior = edge_weight_prior;
  spec.lambda_source = lambda_source == "logits" ? LambdaSource::logits : LambdaSource::attentiveness;
  spec.strategy = parse_strategy(strategy);
  spec.dropout = effective_dropout();
  for (const auto& task : tasks) {
    if (task == "cls") {
      spec.tasks.push_back(TaskSpec{"cls", TaskKind::classification, data.num_classes, 1.0});
    } else {
      spec.tasks.push_back(TaskSpec{"ged", TaskKind::ged, 0, ged_margin});
    }
  }
  spec.validate();
  return spec;
}

std::string config_help() {
  std::ostringstream out;
  for (const auto& k : kKeys) {
    out << "  " << std::left << std::setw(28) << k.key << std::setw(16)
        << (std::string(k.fallback).empty() ? "(unset)" : k.fallback) << k.meaning << '\n';
  }
  return out.str();
}

GraphSet load_dataset(const TrainConfig& config) {
  const bool tu = config.data_source == "tu";
  GraphSet set = tu ? parse_tu_dataset(config.data_dir, config.data_name)
                    : make_synthetic(config.synthetic, config.data_seed);
  if (config.features == "degree" || (config.features == "auto" && !tu)) {
    use_degree_features(set, config.max_degree);
  }
  return set;
}

std::vector<Batch> make_batches(std::span<const GraphInstance> graphs, std::size_t batch_size,
                                std::mt19937_64& rng) {
  if (batch_size == 0) throw SpecError("batch size must be positive");
  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    std::vector<GraphInstance> members;
    for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
      members.push_back(graphs[order[i]]);
    }
    batches.push_back(batch_graphs(members));
  }
  return batches;
}

Var graph_objective(const DotinModel& model, const BoundModel& bound, const GraphInstance& graph,
                    const TrainConfig& config, bool training, std::mt19937_64& rng) {
  ForwardOptions options;
  options.training = training;
  options.rng = &rng;
  const ForwardResult anchor = model.forward(bound, graph, options);
  const auto& tasks = model.spec().tasks;
  std::vector<Var> losses;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (tasks[t].kind == TaskKind::classification) {
      losses.push_back(cross_entropy(anchor.outputs[t], graph.label(kClassLabel)));
    } else {
      const GedTriplet triplet = gen_ged_triplet(graph, config.ged_kp, config.ged_kn, rng());
      const ForwardResult pos = model.forward(bound, triplet.positive, options);
      const ForwardResult neg = model.forward(bound, triplet.negative, options);
      losses.push_back(
          ged_margin_loss(anchor.outputs[t], pos.outputs[t], neg.outputs[t], tasks[t].margin));
    }
  }
  return multitask_loss(losses);
}

EpochStats train_epoch(DotinModel& model, std::span<const Batch> batches, const TrainConfig& config,
                       AdamState& optimizer, std::mt19937_64& rng) {
  EpochStats stats;
  double total = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const Batch& batch = batches[b];
    Tape tape;
    const BoundModel bound = model.bind(tape);
    std::vector<Var> per_graph;
    per_graph.reserve(batch.num_graphs());
    for (std::size_t g = 0; g < batch.num_graphs(); ++g) {
      per_graph.push_back(graph_objective(model, bound, batch.graph(g), config, true, rng));
    }
    const Var loss = mean_of(per_graph);
    const double value = loss.value().item();
    if (!std::isfinite(value)) {
      throw DivergenceError("loss is not finite at batch " + std::to_string(b));
    }
    tape.backward(loss);
    model.params().zero_grads();
    model.params().collect_grads(bound.all);
    adam_step(model.params().values(), model.params().grads(), optimizer);
    total += value;
    ++stats.batches;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  stats.mean_loss = stats.batches ? total / static_cast<double>(stats.batches) : 0.0;
  stats.batches_per_sec = seconds > 0.0 ? static_cast<double>(stats.batches) / seconds : 0.0;
  return stats;
}

MetricReport evaluate(const DotinModel& model, std::span<const GraphInstance> graphs,
                      const TrainConfig& config, std::uint64_t seed) {
  if (graphs.empty()) throw MetricError("cannot evaluate on an empty graph set");
  const auto& tasks = model.spec().tasks;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> correct(tasks.size(), 0);
  std::vector<std::vector<std::pair<double, double>>> distances(tasks.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    Tape tape;
    const BoundModel bound = model.bind(tape);
    ForwardOptions options;
    options.rng = &rng;
    const ForwardResult anchor = model.forward(bound, graphs[i], options);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].kind == TaskKind::classification) {
        if (argmax(anchor.outputs[t].value()) == graphs[i].label(kClassLabel)) ++correct[t];
      } else {
        const auto a = anchor.outputs[t].value().values();
        for (std::size_t r = 0; r < config.ged_eval_triplets; ++r) {
          const GedTriplet triplet =
              gen_ged_triplet(graphs[i], config.ged_kp, config.ged_kn, mix(mix(seed, i), r));
          const ForwardResult pos = model.forward(bound, triplet.positive, options);
          const ForwardResult neg = model.forward(bound, triplet.negative, options);
          distances[t].emplace_back(squared_distance(a, pos.outputs[t].value().values()),
                                    squared_distance(a, neg.outputs[t].value().values()));
        }
      }
    }
  }
  MetricReport report;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const std::string& name = tasks[t].name;
    if (tasks[t].kind == TaskKind::classification) {
      report.metrics[name + ".accuracy"] =
          static_cast<double>(correct[t]) / static_cast<double>(graphs.size());
    } else {
      std::vector<double> similarity;
      std::vector<bool> similar;
      for (const auto& [dp, dn] : distances[t]) {
        similarity.push_back(-dp);
        similar.push_back(true);
        similarity.push_back(-dn);
        similar.push_back(false);
      }
      report.metrics[name + ".triplet_accuracy"] = triplet_accuracy(distances[t]);
      report.metrics[name + ".pair_auc"] = pair_auc(similarity, similar);
      report.triplet_distances = distances[t];
    }
  }
  return report;
}

std::map<std::string, std::pair<double, double>> aggregate_folds(std::span<const FoldReport> folds) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& f : folds) {
    for (const auto& [metric, v] : f.test.metrics) values[metric].push_back(v);
  }
  std::map<std::string, std::pair<double, double>> out;
  for (const auto& [metric, xs] : values) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    out[metric] = {mean, sample_std(xs, mean)};
  }
  return out;
}

std::string RunReport::csv() const {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "fold,epoch,task,metric,value\n";
  for (const auto& f : folds) {
    for (std::size_t e = 0; e < f.epochs.size(); ++e) {
      out << f.fold << ',' << e << ",all,train_loss," << f.epochs[e].mean_loss << '\n';
    }
    for (const auto& [metric, v] : f.test.metrics) {
      const auto dot = metric.find('.');
      out << f.fold << ',' << f.epochs.size() << ',' << metric.substr(0, dot) << ",test_"
          << metric.substr(dot + 1) << ',' << v << '\n';
    }
  }
  return out.str();
}

std::string RunReport::summary() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << folds.size() << " folds\n";
  for (const auto& [metric, ms] : aggregate) {
    out << "  " << std::left << std::setw(24) << metric << ms.first << " +/- " << ms.second << '\n';
  }
  return out.str();
}

TrainedFold train_and_evaluate(const TrainConfig& config, const GraphSet& data,
                               std::span<const std::size_t> train, std::span<const std::size_t> test,
                               std::uint64_t seed) {
  DotinModel model(config.model_spec(data), mix(seed, 0));
  AdamOptions adam;
  adam.lr = config.lr;
  adam.weight_decay = config.weight_decay;
  AdamState optimizer = make_adam_state(model.params().values(), adam);
  std::mt19937_64 rng(mix(seed, 1));

  const std::vector<GraphInstance> train_graphs = data.subset(train);
  const std::vector<GraphInstance> test_graphs = data.subset(test);
  FoldReport report;
  report.train_size = train_graphs.size();
  report.test_size = test_graphs.size();

  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  const std::size_t patience = config.effective_patience();
  for (std::size_t epoch = 0; epoch < config.effective_epochs(); ++epoch) {
    const auto batches = make_batches(train_graphs, config.effective_batch_size(), rng);
    const EpochStats stats = train_epoch(model, batches, config, optimizer, rng);
    report.epochs.push_back(stats);
    if (stats.mean_loss < best - config.early_stop_delta) {
      best = stats.mean_loss;
      stale = 0;
    } else if (patience > 0 && ++stale >= patience) {
      break;
    }
  }
  report.test = evaluate(model, test_graphs, config, mix(seed, 2));
  return TrainedFold{std::move(report), std::move(model)};
}

RunReport run_cross_validation(const TrainConfig& config, const GraphSet& data,
                               DotinModel* last_model) {
  const std::vector<Fold> folds = kfold_split(data, config.folds, config.seed);
  std::vector<std::optional<TrainedFold>> results(folds.size());
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t next = 0;
  std::mutex next_mutex;

  auto worker = [&] {
    for (;;) {
      std::size_t f;
      {
        std::lock_guard lock(next_mutex);
        if (next >= folds.size()) return;
        f = next++;
      }
      try {
        results[f] = train_and_evaluate(config, data, folds[f].train, folds[f].test,
                                        mix(config.seed, 100 + f));
        results[f]->report.fold = f;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  const std::size_t workers = std::min(config.threads, folds.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  RunReport report;
  for (auto& r : results) report.folds.push_back(r->report);
  report.aggregate = aggregate_folds(report.folds);
  if (last_model != nullptr) *last_model = std::move(results.back()->model);
  return report;
}

}  // namespace dotin
