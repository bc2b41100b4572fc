#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "dotin/errors.hpp"
#include "dotin/tasks.hpp"
#include "gradcheck.hpp"
#include "reference.hpp"

using namespace dotin;
using namespace dotin::testing;

namespace {

std::set<std::pair<std::size_t, std::size_t>> edges(const GraphInstance& g) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    for (std::size_t j = i + 1; j < g.num_nodes(); ++j)
      if (g.adjacency(i, j) > 0) out.insert({i, j});
  return out;
}

std::size_t symmetric_difference(const GraphInstance& a, const GraphInstance& b) {
  const auto ea = edges(a);
  const auto eb = edges(b);
  std::size_t d = 0;
  for (const auto& e : ea) d += !eb.contains(e);
  for (const auto& e : eb) d += !ea.contains(e);
  return d;
}

}  // namespace

TEST(Classification, MatchesTensorCrossEntropy) {
  Tape tape;
  const Var e = tape.constant(Tensor::from_rows({{0.5, -1.0}}));
  const Var w = tape.constant(Tensor::from_rows({{1, 2, 0}, {0, 1, 3}}));
  const Var b = tape.constant(Tensor::from_rows({{0.1, 0.2, 0.3}}));
  const Tensor logits = Tensor::from_rows({{0.5 + 0.1, 1.0 - 1.0 + 0.2, -3.0 + 0.3}});
  EXPECT_NEAR(classification_loss(e, w, b, 2).value().item(),
              cross_entropy_from_logits(logits.values(), 2), 1e-12);
  EXPECT_THROW((void)classification_loss(e, w, b, 3), IndexError);
}

TEST(Multitask, Mean) {
  EXPECT_DOUBLE_EQ(multitask_loss(std::vector<double>{1.0, 3.0}), 2.0);
  EXPECT_THROW((void)multitask_loss(std::vector<double>{}), SpecError);
  Tape tape;
  const Var parts[] = {tape.constant(Tensor::scalar(1)), tape.constant(Tensor::scalar(4))};
  EXPECT_DOUBLE_EQ(multitask_loss(parts).value().item(), 2.5);
}

TEST(GedTriplet, EditCountsAndDeterminism) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const GraphInstance g = random_graph(15, 4, rng);
    const GedTriplet t = gen_ged_triplet(g, 1, 3, static_cast<std::uint64_t>(trial));
    EXPECT_EQ(t.anchor, g);
    EXPECT_EQ(symmetric_difference(g, t.positive), 2u);
    EXPECT_EQ(symmetric_difference(g, t.negative), 6u);
    EXPECT_EQ(t.positive.edge_count(), g.edge_count());
    EXPECT_EQ(t.positive.adjacency, transpose(t.positive.adjacency));
    EXPECT_EQ(gen_ged_triplet(g, 1, 3, static_cast<std::uint64_t>(trial)).negative, t.negative);
  }
}

TEST(GedTriplet, Errors) {
  std::mt19937_64 rng(1);
  const GraphInstance g = random_graph(6, 4, rng);
  EXPECT_THROW((void)gen_ged_triplet(g, 2, 2, 0), GenerationError);
  EXPECT_THROW((void)gen_ged_triplet(g, 0, 2, 0), GenerationError);
  GraphInstance path;
  path.features = Tensor(3, 1, 1.0);
  path.adjacency = Tensor::from_rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}});
  EXPECT_THROW((void)gen_ged_triplet(path, 1, 2, 0), GenerationError);  // one non-edge only
}

TEST(MarginLoss, Examples) {
  const std::vector<double> a{0, 0}, p{1, 0}, n{0, 2};
  EXPECT_DOUBLE_EQ(ged_margin_loss(a, p, n, 1.0), 0.0);       // 1 + 1 - 4 < 0
  EXPECT_DOUBLE_EQ(ged_margin_loss(a, n, p, 1.0), 4.0);       // 1 + 4 - 1
  Tape tape;
  const Var va = tape.constant(Tensor::row_vector(a));
  const Var vp = tape.constant(Tensor::row_vector(p));
  const Var vn = tape.constant(Tensor::row_vector(n));
  EXPECT_DOUBLE_EQ(ged_margin_loss(va, vn, vp, 1.0).value().item(), 4.0);
  std::mt19937_64 rng(2);
  EXPECT_LT(gradcheck([](Tape&, const auto& v) { return ged_margin_loss(v[0], v[1], v[2], 5.0); },
                      {random_tensor(1, 4, rng), random_tensor(1, 4, rng), random_tensor(1, 4, rng)}),
            1e-6);
}

TEST(PairAuc, BruteForceAgreement) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> level(0, 6);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(20);
    std::vector<bool> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
      s[i] = level(rng);
      y[i] = coin(rng);
    }
    y[0] = true;
    y[1] = false;
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 20; ++j)
        if (y[i] && !y[j]) {
          pairs += 1;
          wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    EXPECT_DOUBLE_EQ(pair_auc(s, y), wins / pairs);
  }
  EXPECT_THROW((void)pair_auc(std::vector<double>{1, 2}, {true, true}), MetricError);
}

TEST(TripletAccuracy, TiesAreWrong) {
  const std::vector<std::pair<double, double>> d{{1, 2}, {2, 2}, {3, 1}, {0, 5}};
  EXPECT_DOUBLE_EQ(triplet_accuracy(d), 0.5);
  EXPECT_THROW((void)triplet_accuracy(std::vector<std::pair<double, double>>{}), MetricError);
}
