#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "dotin/bench.hpp"
#include "dotin/errors.hpp"

using namespace dotin;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.hidden = 8;
  c.layers = 2;
  c.epochs = 1;
  c.folds = 2;
  c.synthetic.graphs_per_class = 4;
  c.synthetic.min_nodes = 8;
  c.synthetic.max_nodes = 10;
  return c;
}

}  // namespace

TEST(Sweep, ZeroRatioIsSingleNoDropRecord) {
  const TrainConfig c = small_config();
  const GraphSet data = load_dataset(c);
  const std::vector<double> ratios{0.0};
  const auto records = sweep_drop_ratio(c, ratios, data);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].strategy, "none");
}

TEST(Sweep, RecordCountsAndReproducibility) {
  const TrainConfig c = small_config();
  const GraphSet data = load_dataset(c);
  const std::vector<double> ratios{0.1, 0.5, 0.9};
  const auto a = sweep_drop_ratio(c, ratios, data);
  EXPECT_EQ(a.size(), 9u);
  EXPECT_EQ(bench_csv(a), bench_csv(sweep_drop_ratio(c, ratios, data)));
  EXPECT_EQ(bench_csv(a).rfind(kBenchCsvHeader, 0), 0u);
  // FLOPs fall as the ratio grows for the dotin strategy.
  std::vector<std::uint64_t> flops;
  for (const auto& r : a)
    if (r.strategy == "dotin") flops.push_back(r.flops_per_batch);
  EXPECT_TRUE(std::is_sorted(flops.rbegin(), flops.rend()));
  const std::vector<double> bad{1.0};
  EXPECT_THROW((void)sweep_drop_ratio(c, bad, data), SpecError);
}

TEST(Throughput, PositiveRate) {
  const TrainConfig c = small_config();
  const GraphSet data = load_dataset(c);
  const DotinModel m(c.model_spec(data), 1);
  std::mt19937_64 rng(0);
  const auto batches = make_batches(data.graphs, 2, rng);
  EXPECT_GT(measure_throughput(m, batches, c, {1, 3, 3}), 0.0);
}

TEST(AttentivenessRanks, PermutationColumns) {
  TrainConfig c = small_config();
  c.tasks = {"cls", "ged"};
  const GraphSet data = load_dataset(c);
  const DotinModel m(c.model_spec(data), 4);
  const AttentivenessRanks r = export_attentiveness_ranks(m, data.graphs);
  std::istringstream in(r.csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "graph_id,node_id,rank_task1,rank_task2");
  std::size_t rows = 0;
  std::vector<std::vector<std::size_t>> col1(data.size()), col2(data.size());
  while (std::getline(in, line)) {
    std::size_t g, n, r1, r2;
    char comma;
    std::istringstream row(line);
    row >> g >> comma >> n >> comma >> r1 >> comma >> r2;
    col1[g].push_back(r1);
    col2[g].push_back(r2);
    ++rows;
  }
  std::size_t total = 0;
  for (std::size_t g = 0; g < data.size(); ++g) {
    total += data.graphs[g].num_nodes();
    for (auto* col : {&col1[g], &col2[g]}) {
      std::sort(col->begin(), col->end());
      for (std::size_t i = 0; i < col->size(); ++i) EXPECT_EQ((*col)[i], i + 1);
    }
  }
  EXPECT_EQ(rows, total);
  EXPECT_EQ(r.spearman.size(), data.size());
}

TEST(AttentivenessRanks, IdenticalVirtualsGiveIdenticalRanks) {
  TrainConfig c = small_config();
  c.tasks = {"cls", "ged"};
  const GraphSet data = load_dataset(c);
  DotinModel m(c.model_spec(data), 4);
  Tensor& bank = m.params().value("virtual.embeddings");
  for (std::size_t j = 0; j < bank.cols(); ++j) bank(1, j) = bank(0, j);
  for (double rho : export_attentiveness_ranks(m, data.graphs).spearman) EXPECT_DOUBLE_EQ(rho, 1.0);

  const TrainConfig single = small_config();
  EXPECT_THROW((void)export_attentiveness_ranks(DotinModel(single.model_spec(data), 1), data.graphs),
               SpecError);
}

TEST(Spearman, KnownValues) {
  const std::vector<std::size_t> a{1, 2, 3, 4}, b{4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(spearman(a, a), 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, b), -1.0);
}

TEST(DropPlans, CsvHasHeaderAndRows) {
  TrainConfig c = small_config();
  c.alpha = 0.5;
  const GraphSet data = load_dataset(c);
  const DotinModel m(c.model_spec(data), 1);
  const std::string csv = export_drop_plans(m, data.graphs, 0);
  EXPECT_EQ(csv.rfind(kDropPlanCsvHeader, 0), 0u);
  std::size_t expected = 1;
  for (const auto& g : data.graphs) expected += g.num_nodes();  // one stage per graph
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), expected);
}
