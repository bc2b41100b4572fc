#include <gtest/gtest.h>

#include <cmath>

#include "dotin/errors.hpp"
#include "dotin/optim.hpp"

using namespace dotin;

TEST(Adam, ZeroGradNoDecayLeavesParams) {
  std::vector<Tensor> p{Tensor(2, 2, 1.5)};
  const std::vector<Tensor> g{Tensor(2, 2, 0.0)};
  AdamState s = make_adam_state(p, {});
  adam_step(p, g, s);
  EXPECT_EQ(p[0], Tensor(2, 2, 1.5));
  EXPECT_EQ(s.t, 1);
}

TEST(Adam, ZeroLearningRateLeavesParams) {
  std::vector<Tensor> p{Tensor(1, 3, 0.7)};
  const std::vector<Tensor> g{Tensor(1, 3, 2.0)};
  AdamOptions o;
  o.lr = 0.0;
  o.weight_decay = 8e-4;
  AdamState s = make_adam_state(p, o);
  adam_step(p, g, s);
  EXPECT_EQ(p[0], Tensor(1, 3, 0.7));
}

TEST(Adam, FirstStepMagnitude) {
  std::vector<Tensor> p{Tensor::scalar(1.0)};
  const std::vector<Tensor> g{Tensor::scalar(0.3)};
  AdamState s = make_adam_state(p, {});
  adam_step(p, g, s);
  EXPECT_NEAR(p[0].item(), 1.0 - 1e-3 * 0.3 / (0.3 + 1e-8), 1e-12);
}

TEST(Adam, StepCounterAndMoments) {
  std::vector<Tensor> p{Tensor::scalar(1.0)};
  const std::vector<Tensor> g{Tensor::scalar(-1.0)};
  AdamState s = make_adam_state(p, {});
  EXPECT_EQ(s.m[0].item(), 0.0);
  for (int i = 1; i <= 3; ++i) {
    adam_step(p, g, s);
    EXPECT_EQ(s.t, i);
  }
  EXPECT_GT(p[0].item(), 1.0);
}

TEST(Adam, ShapeMismatch) {
  std::vector<Tensor> p{Tensor(2, 2)};
  const std::vector<Tensor> g{Tensor(2, 3)};
  AdamState s = make_adam_state(p, {});
  EXPECT_THROW(adam_step(p, g, s), DimensionError);
}

TEST(ParameterStore, BindCollectAndChecksum) {
  ParameterStore store;
  store.add("w", Tensor(1, 2, 3.0));
  EXPECT_TRUE(store.contains("w"));
  EXPECT_THROW((void)store.index("missing"), IndexError);
  const auto before = store.checksum();
  Tape tape;
  const auto vars = store.bind(tape);
  tape.backward(squared_norm(vars[0]));
  store.zero_grads();
  store.collect_grads(vars);
  EXPECT_EQ(store.grad(0), Tensor(1, 2, 6.0));
  EXPECT_EQ(store.checksum(), before);
  store.value(0)(0, 0) = 4.0;
  EXPECT_NE(store.checksum(), before);
  EXPECT_EQ(store.element_count(), 2u);
}
