#include "dotin/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "dotin/config.hpp"
#include "dotin/errors.hpp"

namespace dotin {
namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

long long parse_integer(const std::string& token, const std::filesystem::path& file,
                        std::size_t line_no) {
  try {
    std::size_t used = 0;
    const std::string t = trim(token);
    const long long v = std::stoll(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw IngestionError(file.filename().string() + " line " + std::to_string(line_no) +
                         ": '" + token + "' is not an integer");
  }
}

void add_undirected_edge(Tensor& adjacency, std::size_t i, std::size_t j) {
  if (i == j) return;
  adjacency(i, j) = 1.0;
  adjacency(j, i) = 1.0;
}

}  // namespace

std::size_t GraphInstance::edge_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < adjacency.rows(); ++i)
    for (std::size_t j = i + 1; j < adjacency.cols(); ++j)
      if (adjacency(i, j) != 0.0 || adjacency(j, i) != 0.0) ++count;
  return count;
}

std::size_t GraphInstance::label(const std::string& task) const {
  const auto it = labels.find(task);
  if (it == labels.end()) throw IndexError("graph has no label for task '" + task + "'");
  return it->second;
}

void GraphInstance::validate() const {
  const std::size_t n = features.rows();
  if (adjacency.rows() != n || adjacency.cols() != n) {
    throw ConsistencyError("adjacency " + adjacency.shape().str() + " does not match " +
                           std::to_string(n) + " feature rows");
  }
  for (double v : adjacency.values()) {
    if (v < 0.0 || !std::isfinite(v)) throw DomainError("adjacency has a negative weight");
  }
  for (double v : features.values()) {
    if (!std::isfinite(v)) throw DomainError("features contain a non-finite value");
  }
}

std::vector<GraphInstance> GraphSet::subset(std::span<const std::size_t> indices) const {
  std::vector<GraphInstance> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(graphs.at(i));
  return out;
}

double GraphSet::mean_nodes() const {
  if (graphs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& g : graphs) total += static_cast<double>(g.num_nodes());
  return total / static_cast<double>(graphs.size());
}

GraphInstance Batch::graph(std::size_t i) const {
  const NodeRange r = ranges.at(i);
  GraphInstance g;
  g.features = Tensor(r.size(), features.cols());
  g.adjacency = Tensor(r.size(), r.size());
  for (std::size_t a = 0; a < r.size(); ++a) {
    for (std::size_t c = 0; c < features.cols(); ++c) g.features(a, c) = features(r.begin + a, c);
    for (std::size_t b = 0; b < r.size(); ++b) g.adjacency(a, b) = adjacency(r.begin + a, r.begin + b);
  }
  g.labels = labels.at(i);
  return g;
}

GraphSet parse_tu_dataset(const std::filesystem::path& directory, const std::string& name) {
  const auto file = [&](const std::string& suffix) { return directory / (name + "_" + suffix); };
  for (const char* required : {"A.txt", "graph_indicator.txt", "graph_labels.txt"}) {
    if (!std::filesystem::exists(file(required))) {
      throw IngestionError("missing mandatory file " + file(required).string());
    }
  }

  const auto indicator_path = file("graph_indicator.txt");
  const auto indicator_lines = read_lines(indicator_path);
  const std::size_t total_nodes = indicator_lines.size();
  std::vector<std::size_t> node_graph(total_nodes);
  std::map<long long, std::size_t> graph_ids;  // raw id -> dense index
  for (std::size_t n = 0; n < total_nodes; ++n) {
    const long long gid = parse_integer(indicator_lines[n], indicator_path, n + 1);
    graph_ids.emplace(gid, 0);
    node_graph[n] = static_cast<std::size_t>(gid);
  }
  {
    std::size_t next = 0;
    for (auto& [raw, dense] : graph_ids) dense = next++;
  }
  const std::size_t num_graphs = graph_ids.size();
  std::vector<std::size_t> graph_sizes(num_graphs, 0);
  std::vector<std::size_t> local_index(total_nodes);
  for (std::size_t n = 0; n < total_nodes; ++n) {
    const std::size_t g = graph_ids.at(static_cast<long long>(node_graph[n]));
    node_graph[n] = g;
    local_index[n] = graph_sizes[g]++;
  }

  const auto labels_path = file("graph_labels.txt");
  const auto label_lines = read_lines(labels_path);
  if (label_lines.size() != num_graphs) {
    throw ConsistencyError(labels_path.filename().string() + " has " +
                           std::to_string(label_lines.size()) + " labels for " +
                           std::to_string(num_graphs) + " graphs");
  }
  std::vector<long long> raw_labels;
  for (std::size_t i = 0; i < label_lines.size(); ++i) {
    raw_labels.push_back(parse_integer(label_lines[i], labels_path, i + 1));
  }
  std::map<long long, std::size_t> class_map;
  for (long long l : raw_labels) class_map.emplace(l, 0);
  {
    std::size_t next = 0;
    for (auto& [raw, dense] : class_map) dense = next++;
  }

  std::vector<long long> node_labels;
  std::map<long long, std::size_t> node_label_map;
  const auto node_labels_path = file("node_labels.txt");
  if (std::filesystem::exists(node_labels_path)) {
    const auto lines = read_lines(node_labels_path);
    if (lines.size() != total_nodes) {
      throw ConsistencyError(node_labels_path.filename().string() + " has " +
                             std::to_string(lines.size()) + " entries for " +
                             std::to_string(total_nodes) + " nodes");
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      // Some TU datasets carry several comma-separated node labels; the first is used.
      const auto first = split_list(lines[i]).front();
      node_labels.push_back(parse_integer(first, node_labels_path, i + 1));
      node_label_map.emplace(node_labels.back(), 0);
    }
    std::size_t next = 0;
    for (auto& [raw, dense] : node_label_map) dense = next++;
  }
  const std::size_t feature_dim = node_labels.empty() ? 1 : node_label_map.size();

  GraphSet set;
  set.name = name;
  set.feature_dim = feature_dim;
  set.num_classes = class_map.size();
  set.graphs.resize(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    auto& graph = set.graphs[g];
    graph.features = Tensor(graph_sizes[g], feature_dim, node_labels.empty() ? 1.0 : 0.0);
    graph.adjacency = Tensor(graph_sizes[g], graph_sizes[g]);
    graph.labels[kClassLabel] = class_map.at(raw_labels[g]);
  }
  if (!node_labels.empty()) {
    for (std::size_t n = 0; n < total_nodes; ++n) {
      set.graphs[node_graph[n]].features(local_index[n], node_label_map.at(node_labels[n])) = 1.0;
    }
  }

  const auto edges_path = file("A.txt");
  const auto edge_lines = read_lines(edges_path);
  for (std::size_t i = 0; i < edge_lines.size(); ++i) {
    const auto parts = split_list(edge_lines[i]);
    if (parts.size() != 2) {
      throw IngestionError(edges_path.filename().string() + " line " + std::to_string(i + 1) +
                           ": expected 'i, j'");
    }
    const long long a = parse_integer(parts[0], edges_path, i + 1);
    const long long b = parse_integer(parts[1], edges_path, i + 1);
    const auto in_range = [&](long long v) {
      return v >= 1 && static_cast<std::size_t>(v) <= total_nodes;
    };
    if (!in_range(a) || !in_range(b)) {
      throw ConsistencyError(edges_path.filename().string() + " line " + std::to_string(i + 1) +
                             ": node id outside [1, " + std::to_string(total_nodes) + "]");
    }
    const std::size_t na = static_cast<std::size_t>(a - 1);
    const std::size_t nb = static_cast<std::size_t>(b - 1);
    if (node_graph[na] != node_graph[nb]) {
      throw ConsistencyError(edges_path.filename().string() + " line " + std::to_string(i + 1) +
                             ": edge joins nodes of different graphs");
    }
    add_undirected_edge(set.graphs[node_graph[na]].adjacency, local_index[na], local_index[nb]);
  }
  return set;
}

void write_tu_dataset(const GraphSet& set, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const auto path = [&](const std::string& suffix) {
    return directory / (set.name + "_" + suffix);
  };
  std::ofstream edges(path("A.txt"));
  std::ofstream indicator(path("graph_indicator.txt"));
  std::ofstream labels(path("graph_labels.txt"));
  if (!edges || !indicator || !labels) {
    throw IngestionError("cannot write TU files under " + directory.string());
  }

  bool one_hot = set.feature_dim > 1;
  for (const auto& g : set.graphs) {
    for (std::size_t r = 0; r < g.num_nodes() && one_hot; ++r) {
      std::size_t ones = 0;
      for (double v : g.features.row(r)) {
        if (v == 1.0) {
          ++ones;
        } else if (v != 0.0) {
          one_hot = false;
        }
      }
      one_hot = one_hot && ones == 1;
    }
  }
  std::ofstream node_labels;
  if (one_hot) node_labels.open(path("node_labels.txt"));

  std::size_t offset = 0;
  for (std::size_t gi = 0; gi < set.graphs.size(); ++gi) {
    const auto& g = set.graphs[gi];
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      indicator << gi + 1 << '\n';
      if (one_hot) {
        const auto row = g.features.row(i);
        node_labels << std::distance(row.begin(), std::find(row.begin(), row.end(), 1.0)) << '\n';
      }
      for (std::size_t j = 0; j < g.num_nodes(); ++j) {
        if (g.adjacency(i, j) != 0.0) edges << offset + i + 1 << ", " << offset + j + 1 << '\n';
      }
    }
    labels << g.label() << '\n';
    offset += g.num_nodes();
  }
}

Motif parse_motif(const std::string& name) {
  if (name == "triangle") return Motif::triangle;
  if (name == "star") return Motif::star;
  if (name == "cycle4") return Motif::cycle4;
  if (name == "clique4") return Motif::clique4;
  throw SpecError("unknown motif '" + name + "' (triangle, star, cycle4, clique4)");
}

std::string motif_name(Motif motif) {
  switch (motif) {
    case Motif::triangle: return "triangle";
    case Motif::star: return "star";
    case Motif::cycle4: return "cycle4";
    case Motif::clique4: return "clique4";
  }
  return "?";
}

std::size_t motif_size(Motif motif) {
  switch (motif) {
    case Motif::triangle: return 3;
    case Motif::star: return 5;  // centre plus four leaves
    case Motif::cycle4: return 4;
    case Motif::clique4: return 4;
  }
  return 0;
}

GraphSet make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.class_motifs.size() < 2) throw SpecError("synthetic data needs at least two classes");
  if (spec.min_nodes > spec.max_nodes) throw SpecError("min_nodes exceeds max_nodes");
  for (Motif m : spec.class_motifs) {
    if (motif_size(m) > spec.min_nodes) {
      throw SpecError("motif " + motif_name(m) + " needs " + std::to_string(motif_size(m)) +
                      " nodes but min_nodes is " + std::to_string(spec.min_nodes));
    }
  }
  if (spec.noise_edge_probability < 0.0 || spec.noise_edge_probability > 1.0) {
    throw SpecError("noise edge probability must lie in [0, 1]");
  }

  std::mt19937_64 rng(seed);
  GraphSet set;
  set.name = "synthetic";
  set.feature_dim = 1;
  set.num_classes = spec.class_motifs.size();
  for (std::size_t c = 0; c < spec.class_motifs.size(); ++c) {
    for (std::size_t k = 0; k < spec.graphs_per_class; ++k) {
      std::uniform_int_distribution<std::size_t> size_dist(spec.min_nodes, spec.max_nodes);
      const std::size_t n = size_dist(rng);
      GraphInstance g;
      g.features = Tensor(n, 1, 1.0);
      g.adjacency = Tensor(n, n);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i = 0; i + 1 < n; ++i) add_undirected_edge(g.adjacency, order[i], order[i + 1]);
      if (spec.noise_edge_probability > 0.0) {
        std::bernoulli_distribution noise(spec.noise_edge_probability);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j)
            if (noise(rng)) add_undirected_edge(g.adjacency, i, j);
      }
      std::shuffle(order.begin(), order.end(), rng);
      const std::size_t* m = order.data();
      switch (spec.class_motifs[c]) {
        case Motif::triangle:
          add_undirected_edge(g.adjacency, m[0], m[1]);
          add_undirected_edge(g.adjacency, m[1], m[2]);
          add_undirected_edge(g.adjacency, m[0], m[2]);
          break;
        case Motif::star:
          for (std::size_t leaf = 1; leaf < 5; ++leaf) add_undirected_edge(g.adjacency, m[0], m[leaf]);
          break;
        case Motif::cycle4:
          for (std::size_t i = 0; i < 4; ++i) add_undirected_edge(g.adjacency, m[i], m[(i + 1) % 4]);
          break;
        case Motif::clique4:
          for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) add_undirected_edge(g.adjacency, m[i], m[j]);
          break;
      }
      g.labels[kClassLabel] = c;
      set.graphs.push_back(std::move(g));
    }
  }
  return set;
}

void use_degree_features(GraphSet& set, std::size_t max_degree) {
  for (GraphInstance& g : set.graphs) {
    const std::size_t n = g.num_nodes();
    Tensor features(n, max_degree + 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t degree = 0;
      for (std::size_t j = 0; j < n; ++j) degree += (i != j && g.adjacency(i, j) != 0.0) ? 1 : 0;
      features(i, std::min(degree, max_degree)) = 1.0;
    }
    g.features = std::move(features);
  }
  set.feature_dim = max_degree + 1;
}

Batch batch_graphs(std::span<const GraphInstance> graphs) {
  if (graphs.empty()) throw DimensionError("batch_graphs: empty graph list");
  const std::size_t f = graphs.front().feature_dim();
  std::size_t total = 0;
  for (const auto& g : graphs) {
    if (g.feature_dim() != f) {
      throw DimensionError("batch_graphs: feature dimension " + std::to_string(g.feature_dim()) +
                           " differs from " + std::to_string(f));
    }
    total += g.num_nodes();
  }
  Batch batch;
  batch.features = Tensor(total, f);
  batch.adjacency = Tensor(total, total);
  std::size_t at = 0;
  for (const auto& g : graphs) {
    const std::size_t n = g.num_nodes();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < f; ++c) batch.features(at + i, c) = g.features(i, c);
      for (std::size_t j = 0; j < n; ++j) batch.adjacency(at + i, at + j) = g.adjacency(i, j);
    }
    batch.ranges.push_back({at, at + n});
    batch.labels.push_back(g.labels);
    at += n;
  }
  return batch;
}

std::vector<Fold> kfold_split(const GraphSet& set, std::size_t k, std::uint64_t seed) {
  const std::size_t n = set.size();
  if (k < 2 || k > n) {
    throw SpecError("kfold_split: k=" + std::to_string(k) + " outside [2, " + std::to_string(n) +
                    "]");
  }
  std::mt19937_64 rng(seed);
  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& labels = set.graphs[i].labels;
    const auto it = labels.find(kClassLabel);
    by_class[it == labels.end() ? 0 : it->second].push_back(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    order.insert(order.end(), members.begin(), members.end());
  }
  std::vector<Fold> folds(k);
  for (std::size_t p = 0; p < order.size(); ++p) folds[p % k].test.push_back(order[p]);
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(folds[f].test.begin(), folds[f].test.end());
    std::vector<bool> in_test(n, false);
    for (std::size_t i : folds[f].test) in_test[i] = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_test[i]) folds[f].train.push_back(i);
  }
  return folds;
}

std::string summary_csv(const GraphSet& set) {
  std::ostringstream out;
  out << "name,N,E,label\n";
  for (std::size_t i = 0; i < set.graphs.size(); ++i) {
    const auto& g = set.graphs[i];
    const auto it = g.labels.find(kClassLabel);
    out << set.name << '_' << i << ',' << g.num_nodes() << ',' << g.edge_count() << ','
        << (it == g.labels.end() ? 0 : it->second) << '\n';
  }
  return out.str();
}

}  // namespace dotin
