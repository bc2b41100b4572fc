#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "dotin/errors.hpp"
#include "dotin/graph.hpp"

using namespace dotin;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dotin_graph_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

// Two graphs: a labelled triangle (nodes 1-3) and a path of two (nodes 4-5).
fs::path tiny_tu(bool with_node_labels) {
  const fs::path dir = scratch(with_node_labels ? "labelled" : "plain");
  write(dir / "T_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n");
  write(dir / "T_graph_indicator.txt", "1\n1\n1\n2\n2\n");
  write(dir / "T_graph_labels.txt", "-1\n1\n");
  if (with_node_labels) write(dir / "T_node_labels.txt", "0\n1\n0\n1\n1\n");
  return dir;
}

std::size_t triangles(const GraphInstance& g) {
  std::size_t count = 0;
  const std::size_t n = g.num_nodes();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        if (g.adjacency(i, j) > 0 && g.adjacency(j, k) > 0 && g.adjacency(i, k) > 0) ++count;
  return count;
}

}  // namespace

TEST(TuIngestion, ParsesGraphsLabelsAndFeatures) {
  const GraphSet set = parse_tu_dataset(tiny_tu(true), "T");
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.num_classes, 2u);
  EXPECT_EQ(set.graphs[0].label(), 0u);
  EXPECT_EQ(set.graphs[1].label(), 1u);
  EXPECT_EQ(set.feature_dim, 2u);
  EXPECT_EQ(set.graphs[0].features, Tensor::from_rows({{1, 0}, {0, 1}, {1, 0}}));
  EXPECT_EQ(set.graphs[0].edge_count(), 3u);
  EXPECT_EQ(set.graphs[1].edge_count(), 1u);
  for (const auto& g : set.graphs) {
    EXPECT_EQ(g.adjacency, transpose(g.adjacency));
    g.validate();
  }
}

TEST(TuIngestion, ConstantFeatureWithoutNodeLabels) {
  const GraphSet set = parse_tu_dataset(tiny_tu(false), "T");
  EXPECT_EQ(set.feature_dim, 1u);
  EXPECT_EQ(set.graphs[1].features, Tensor(2, 1, 1.0));
}

TEST(TuIngestion, MissingFileIsNamed) {
  const fs::path dir = tiny_tu(false);
  fs::remove(dir / "T_graph_labels.txt");
  try {
    (void)parse_tu_dataset(dir, "T");
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("T_graph_labels.txt"), std::string::npos);
  }
}

TEST(TuIngestion, CrossGraphEdgeIsConsistencyError) {
  const fs::path dir = tiny_tu(false);
  write(dir / "T_A.txt", "1, 2\n3, 4\n");
  try {
    (void)parse_tu_dataset(dir, "T");
    FAIL();
  } catch (const ConsistencyError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(TuIngestion, WriteThenReadRoundTrips) {
  const GraphSet set = parse_tu_dataset(tiny_tu(true), "T");
  const fs::path out = scratch("roundtrip");
  write_tu_dataset(set, out);
  EXPECT_EQ(parse_tu_dataset(out, "T"), set);
}

// Real datasets are not bundled; point DOTIN_TU_DIR at a directory holding
// DD/ and PROTEINS/ in TU format to run these.
TEST(TuIngestion, RealDatasetsWhenAvailable) {
  const char* root = std::getenv("DOTIN_TU_DIR");
  if (root == nullptr) GTEST_SKIP() << "DOTIN_TU_DIR not set";
  const GraphSet dd = parse_tu_dataset(fs::path(root) / "DD", "DD");
  EXPECT_EQ(dd.size(), 1178u);
  const auto folds = kfold_split(dd, 10, 0);
  for (const auto& f : folds) EXPECT_TRUE(f.test.size() == 117 || f.test.size() == 118);
  const GraphSet proteins = parse_tu_dataset(fs::path(root) / "PROTEINS", "PROTEINS");
  EXPECT_EQ(proteins.size(), 1113u);
}

TEST(Synthetic, CountsAndDeterminism) {
  SyntheticSpec spec;
  spec.graphs_per_class = 10;
  const GraphSet a = make_synthetic(spec, 7);
  EXPECT_EQ(a.size(), 20u);
  std::size_t zeros = 0;
  for (const auto& g : a.graphs) {
    zeros += g.label() == 0;
    EXPECT_GE(g.num_nodes(), spec.min_nodes);
    EXPECT_LE(g.num_nodes(), spec.max_nodes);
    g.validate();
  }
  EXPECT_EQ(zeros, 10u);
  EXPECT_EQ(make_synthetic(spec, 7), a);
  EXPECT_NE(make_synthetic(spec, 8), a);
}

TEST(Synthetic, TriangleClassHasTriangles) {
  SyntheticSpec spec;
  spec.graphs_per_class = 25;
  for (const auto& g : make_synthetic(spec, 3).graphs) {
    if (g.label() == 0) EXPECT_GE(triangles(g), 1u);
  }
}

TEST(Synthetic, Errors) {
  SyntheticSpec spec;
  spec.min_nodes = 3;
  EXPECT_THROW((void)make_synthetic(spec, 0), SpecError);  // star needs 5 nodes
  spec = {};
  spec.class_motifs = {Motif::triangle};
  EXPECT_THROW((void)make_synthetic(spec, 0), SpecError);
  EXPECT_THROW((void)parse_motif("hexagon"), SpecError);
}

TEST(DegreeFeatures, OneHotCapped) {
  SyntheticSpec spec;
  spec.graphs_per_class = 2;
  GraphSet set = make_synthetic(spec, 1);
  use_degree_features(set, 3);
  EXPECT_EQ(set.feature_dim, 4u);
  for (const auto& g : set.graphs) {
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      double row = 0.0;
      for (double v : g.features.row(i)) row += v;
      EXPECT_EQ(row, 1.0);
    }
  }
}

TEST(Batching, BlockStructureAndRoundTrip) {
  SyntheticSpec spec;
  spec.graphs_per_class = 2;
  const GraphSet set = make_synthetic(spec, 1);
  const Batch single = batch_graphs(std::span(set.graphs).first(1));
  EXPECT_EQ(single.features, set.graphs[0].features);
  EXPECT_EQ(single.ranges[0], (NodeRange{0, set.graphs[0].num_nodes()}));

  GraphInstance a{Tensor(2, 1, 1.0), Tensor::from_rows({{0, 1}, {1, 0}}), {{kClassLabel, 0}}};
  GraphInstance b{Tensor(3, 1, 2.0), Tensor(3, 3, 1.0), {{kClassLabel, 1}}};
  const std::vector<GraphInstance> two{a, b};
  const Batch batch = batch_graphs(two);
  EXPECT_EQ(batch.adjacency.shape(), (Shape{5, 5}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 2; j < 5; ++j) EXPECT_EQ(batch.adjacency(i, j), 0.0);
  EXPECT_EQ(batch.graph(0), a);
  EXPECT_EQ(batch.graph(1), b);

  EXPECT_THROW((void)batch_graphs(std::vector<GraphInstance>{}), DimensionError);
  GraphInstance wide{Tensor(2, 3), Tensor(2, 2), {}};
  EXPECT_THROW((void)batch_graphs(std::vector<GraphInstance>{a, wide}), DimensionError);
}

TEST(KFold, PartitionProperties) {
  SyntheticSpec spec;
  spec.graphs_per_class = 5;
  const GraphSet set = make_synthetic(spec, 2);
  const auto folds = kfold_split(set, 10, 4);
  ASSERT_EQ(folds.size(), 10u);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    EXPECT_EQ(f.test.size(), 1u);
    EXPECT_EQ(f.train.size() + f.test.size(), set.size());
    for (std::size_t i : f.test) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), set.size());
  EXPECT_EQ(kfold_split(set, 10, 4)[3].test, folds[3].test);
  EXPECT_THROW((void)kfold_split(set, 1, 0), SpecError);
  EXPECT_THROW((void)kfold_split(set, 11, 0), SpecError);
}

TEST(KFold, Stratified) {
  SyntheticSpec spec;
  spec.graphs_per_class = 20;
  const GraphSet set = make_synthetic(spec, 2);
  for (const auto& f : kfold_split(set, 4, 9)) {
    std::size_t zeros = 0;
    for (std::size_t i : f.test) zeros += set.graphs[i].label() == 0;
    EXPECT_EQ(zeros, 5u);
  }
}

TEST(Summary, CsvHasHeaderAndRows) {
  SyntheticSpec spec;
  spec.graphs_per_class = 2;
  const std::string csv = summary_csv(make_synthetic(spec, 1));
  EXPECT_EQ(csv.rfind("name,N,E,label\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}
