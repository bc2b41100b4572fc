#include "dotin/model.hpp"

#include <cmath>

#include "dotin/errors.hpp"

namespace dotin {
namespace {

Tensor gaussian(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t(rows, cols);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  return gaussian(fan_in, fan_out, std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)), rng);
}

Var dropout(Var x, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(1.0 - p);
  Tensor mask(x.rows(), x.cols());
  for (double& v : mask.values()) v = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
  return multiply_constant(x, mask);
}

std::string layer_prefix(std::size_t l) { return "layer" + std::to_string(l); }

}  // namespace

DropStrategy parse_strategy(const std::string& name) {
  if (name == "dotin") return DropStrategy::dotin;
  if (name == "random") return DropStrategy::random;
  if (name == "none") return DropStrategy::none;
  throw ConfigError("unknown drop strategy '" + name + "' (dotin, random, none)");
}

std::string strategy_name(DropStrategy strategy) {
  switch (strategy) {
    case DropStrategy::dotin: return "dotin";
    case DropStrategy::random: return "random";
    case DropStrategy::none: return "none";
  }
  return "?";
}

double ModelSpec::alpha_at(std::size_t layer) const {
  if (strategy == DropStrategy::none || layer >= alpha.size()) return 0.0;
  return alpha[layer];
}

void ModelSpec::validate() const {
  if (layers == 0) throw SpecError("model needs at least one layer");
  if (hidden == 0 || in_features == 0) throw SpecError("model dimensions must be positive");
  if (heads == 0 || hidden % heads != 0) {
    throw SpecError("hidden dimension " + std::to_string(hidden) + " is not divisible by " +
                    std::to_string(heads) + " heads");
  }
  if (tasks.empty()) throw SpecError("model needs at least one task (one virtual node)");
  if (!alpha.empty() && alpha.size() != layers) {
    throw SpecError("alpha schedule has " + std::to_string(alpha.size()) + " entries for " +
                    std::to_string(layers) + " layers");
  }
  for (double a : alpha) {
    if (!(a >= 0.0 && a < 1.0)) throw SpecError("drop ratios must lie in [0, 1)");
  }
  for (const auto& t : tasks) {
    if (t.kind == TaskKind::classification && t.num_classes < 2) {
      throw SpecError("classification task '" + t.name + "' needs at least two classes");
    }
    if (t.kind == TaskKind::ged && !(t.margin > 0.0)) {
      throw SpecError("ged task '" + t.name + "' needs a positive margin");
    }
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw SpecError("dropout must lie in [0, 1)");
}

std::vector<double> ModelSpec::default_schedule(std::size_t layers, double alpha) {
  std::vector<double> schedule(layers, alpha);
  if (!schedule.empty()) schedule.back() = 0.0;
  return schedule;
}

DotinModel::DotinModel(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  const std::size_t d = spec_.hidden;
  const std::size_t d_att = spec_.attention_dim();
  params_.add("input.weight", glorot(spec_.in_features, d, rng));
  params_.add("virtual.embeddings",
              gaussian(spec_.num_virtual(), d, 1.0 / std::sqrt(static_cast<double>(d)), rng));
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    const std::string prefix = layer_prefix(l);
    if (spec_.backbone == BackboneKind::gat) {
      for (std::size_t h = 0; h < spec_.heads; ++h) {
        const std::string hp = prefix + ".head" + std::to_string(h);
        params_.add(hp + ".w1", glorot(d, d_att, rng));
        params_.add(hp + ".w2", glorot(d, d_att, rng));
        params_.add(hp + ".w_out", glorot(d, d / spec_.heads, rng));
      }
    } else {
      params_.add(prefix + ".theta", glorot(d, d, rng));
      params_.add(prefix + ".score.w1", glorot(d, d_att, rng));
      params_.add(prefix + ".score.w2", glorot(d, d_att, rng));
    }
  }
  params_.add("output.weight", glorot(d, d, rng));
  for (std::size_t t = 0; t < spec_.tasks.size(); ++t) {
    const TaskSpec& task = spec_.tasks[t];
    if (task.kind == TaskKind::classification) {
      const std::string hp = "task" + std::to_string(t) + ".head";
      params_.add(hp + ".weight", glorot(d, task.num_classes, rng));
      params_.add(hp + ".bias", Tensor(1, task.num_classes));
    }
  }
}

BoundModel DotinModel::bind(Tape& tape) const {
  BoundModel b;
  b.all = params_.bind(tape);
  const auto get = [&](const std::string& name) { return b.all[params_.index(name)]; };
  b.input_weight = get("input.weight");
  b.virtual_bank = get("virtual.embeddings");
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    const std::string prefix = layer_prefix(l);
    if (spec_.backbone == BackboneKind::gat) {
      GatLayerParams layer;
      for (std::size_t h = 0; h < spec_.heads; ++h) {
        const std::string hp = prefix + ".head" + std::to_string(h);
        layer.heads.push_back({get(hp + ".w1"), get(hp + ".w2"), get(hp + ".w_out")});
      }
      b.gat.push_back(std::move(layer));
    } else {
      b.gcn.push_back({get(prefix + ".theta")});
      b.score_w1.push_back(get(prefix + ".score.w1"));
      b.score_w2.push_back(get(prefix + ".score.w2"));
    }
  }
  b.output_weight = get("output.weight");
  for (std::size_t t = 0; t < spec_.tasks.size(); ++t) {
    if (spec_.tasks[t].kind == TaskKind::classification) {
      const std::string hp = "task" + std::to_string(t) + ".head";
      b.head_weight.push_back(get(hp + ".weight"));
      b.head_bias.push_back(get(hp + ".bias"));
    } else {
      b.head_weight.emplace_back();
      b.head_bias.emplace_back();
    }
  }
  return b;
}

ForwardResult DotinModel::forward(const BoundModel& bound, const GraphInstance& graph,
                                  const ForwardOptions& options) const {
  if (graph.feature_dim() != spec_.in_features) {
    throw DimensionError("forward: graph has " + std::to_string(graph.feature_dim()) +
                         " features, model expects " + std::to_string(spec_.in_features));
  }
  Tape& tape = bound.input_weight.tape();
  const bool use_dropout = options.training && spec_.dropout > 0.0;
  if ((use_dropout || spec_.strategy == DropStrategy::random) && options.rng == nullptr) {
    throw SpecError("forward: an rng is required for dropout or random dropping");
  }

  Var x = matmul(tape.constant(graph.features), bound.input_weight);
  if (use_dropout) x = dropout(x, spec_.dropout, *options.rng);

  ForwardResult result;
  AugmentedGraph g = inject_virtual_nodes(x, graph.adjacency, bound.virtual_bank);
  const std::size_t k = spec_.num_virtual();
  const double tau = std::sqrt(static_cast<double>(spec_.attention_dim()));
  const GatOptions gat_options{spec_.activation, spec_.edge_weight_prior};

  for (std::size_t l = 0; l < spec_.layers; ++l) {
    if (options.keep_layer_inputs) result.layer_inputs.push_back(g);
    const double alpha = spec_.alpha_at(l);
    const std::vector<std::size_t> virtual_rows = g.virtual_rows();
    const std::vector<std::size_t> nonvirtual_rows = g.nonvirtual_rows();
    const std::size_t n = nonvirtual_rows.size();
    const std::size_t count = alpha > 0.0 ? drop_count(n, alpha) : 0;

    Var out;
    Var score_logits;  // 1 x n, pre-softmax attentiveness
    if (spec_.backbone == BackboneKind::gat) {
      Tensor mask = g.adjacency;
      for (std::size_t i = 0; i < mask.rows(); ++i)
        if (mask(i, i) <= 0.0) mask(i, i) = 1.0;
      GatOutput layer = gat_layer(g.features, mask, bound.gat[l], gat_options);
      out = layer.features;
      if (count > 0) {
        // Reuse the layer's own W1/W2 projections; heads are averaged.
        std::vector<Var> per_head;
        for (std::size_t h = 0; h < layer.query.size(); ++h) {
          per_head.push_back(attentiveness_logits(gather_rows(layer.query[h], virtual_rows),
                                                  gather_rows(layer.key[h], nonvirtual_rows)));
        }
        score_logits = per_head.front();
        for (std::size_t h = 1; h < per_head.size(); ++h) score_logits = add(score_logits, per_head[h]);
        if (per_head.size() > 1) score_logits = scale(score_logits, 1.0 / static_cast<double>(per_head.size()));
      }
    } else {
      out = gcn_layer(g.features, g.adjacency, bound.gcn[l], spec_.activation);
      if (count > 0) {
        score_logits = attentiveness_logits(
            matmul(gather_rows(g.features, virtual_rows), bound.score_w1[l]),
            matmul(gather_rows(g.features, nonvirtual_rows), bound.score_w2[l]));
      }
    }

    if (count == 0) {
      g.features = out;
      continue;
    }

    Var scores = masked_softmax_rows(score_logits, Tensor(1, n, 1.0), tau);
    const std::span<const double> score_values = scores.value().values();
    std::vector<std::size_t> dropped;
    if (options.selector) {
      dropped = options.selector(score_values, count);
    } else if (spec_.strategy == DropStrategy::random) {
      dropped = random_indices(n, count, *options.rng);
    } else {
      dropped = smallest_indices(score_values, count);
    }
    const bool from_logits = spec_.lambda_source == LambdaSource::logits;
    Var lambda_source = from_logits ? scale(score_logits, 1.0 / tau) : scores;
    StageRecord stage;
    stage.layer = l;
    stage.nonvirtual_before = n;
    stage.plan = make_drop_plan(score_values, dropped, lambda_source.value().values());
    for (std::size_t r : nonvirtual_rows) stage.origins.push_back(g.tags[r].origin);

    const DropPlan& plan = stage.plan;
    std::vector<std::size_t> dropped_rows;
    std::vector<std::size_t> kept_rows;
    for (std::size_t i : plan.dropped) dropped_rows.push_back(nonvirtual_rows[i]);
    for (std::size_t i : plan.kept) kept_rows.push_back(nonvirtual_rows[i]);
    Var lambda = masked_softmax_rows(gather_cols(lambda_source, plan.dropped),
                                     Tensor(1, plan.dropped.size(), 1.0), 1.0);
    Var fused = fuse_dropped(gather_rows(out, dropped_rows), lambda);

    const Var parts[] = {gather_rows(out, kept_rows), fused, gather_rows(out, virtual_rows)};
    Tensor nonvirtual_adjacency(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        nonvirtual_adjacency(i, j) = g.adjacency(nonvirtual_rows[i], nonvirtual_rows[j]);

    AugmentedGraph next;
    next.features = concat_rows(parts);
    next.adjacency = connect_virtuals(rewire_edges(nonvirtual_adjacency, plan), k);
    for (std::size_t r : kept_rows) next.tags.push_back(g.tags[r]);
    next.tags.push_back({RowKind::fused, -1, l});
    for (std::size_t r : virtual_rows) next.tags.push_back(g.tags[r]);
    stage.rows_after = next.num_rows();
    result.stages.push_back(std::move(stage));
    g = std::move(next);
  }

  Var y = matmul(g.features, bound.output_weight);
  if (use_dropout) y = dropout(y, spec_.dropout, *options.rng);
  const std::vector<std::size_t> virtual_rows = g.virtual_rows();
  for (std::size_t t = 0; t < spec_.tasks.size(); ++t) {
    const std::size_t row[] = {virtual_rows[t]};
    Var embedding = gather_rows(y, row);
    result.embeddings.push_back(embedding);
    if (spec_.tasks[t].kind == TaskKind::classification) {
      result.outputs.push_back(
          add_row_bias(matmul(embedding, bound.head_weight[t]), bound.head_bias[t]));
    } else {
      result.outputs.push_back(embedding);
    }
  }
  g.features = y;
  result.final_graph = std::move(g);
  return result;
}

ForwardResult dotin_forward(const DotinModel& model, Tape& tape, const GraphInstance& graph,
                            const ForwardOptions& options) {
  return model.forward(model.bind(tape), graph, options);
}

}  // namespace dotin
