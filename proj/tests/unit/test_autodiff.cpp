#include <gtest/gtest.h>

#include <random>

#include "dotin/autodiff.hpp"
#include "dotin/errors.hpp"
#include "gradcheck.hpp"

using namespace dotin;
using dotin::testing::gradcheck;
using dotin::testing::random_tensor;

TEST(Autodiff, SumGradientIsOnes) {
  Tape tape;
  Var x = tape.variable(Tensor(1, 3, std::vector<double>{1, 2, 3}));
  tape.backward(sum(x));
  EXPECT_EQ(x.grad(), Tensor(1, 3, 1.0));
}

TEST(Autodiff, ProductRule) {
  Tape tape;
  Var w = tape.variable(Tensor::scalar(2));
  Var x = tape.variable(Tensor::scalar(3));
  tape.backward(matmul(w, x));
  EXPECT_EQ(w.grad().item(), 3.0);
  EXPECT_EQ(x.grad().item(), 2.0);
}

TEST(Autodiff, NonScalarLossIsRankError) {
  Tape tape;
  Var x = tape.variable(Tensor(2, 2, 1.0));
  EXPECT_THROW(tape.backward(x), RankError);
}

TEST(Autodiff, TopologicalOrder) {
  Tape tape;
  Var a = tape.variable(Tensor(2, 2, 1.0));
  Var b = elu(matmul(a, a));
  Var c = sum(add(b, a));
  for (std::size_t id = 0; id < tape.size(); ++id) {
    for (std::size_t in : tape.inputs(id)) EXPECT_LT(in, id);
  }
  tape.backward(c);
  EXPECT_EQ(a.grad().shape(), a.shape());
}

TEST(Autodiff, ConstantsGetNoGradient) {
  Tape tape;
  Var c = tape.constant(Tensor(1, 2, 1.0));
  Var x = tape.variable(Tensor(1, 2, 2.0));
  tape.backward(sum(hadamard(c, x)));
  EXPECT_FALSE(c.requires_grad());
  EXPECT_EQ(x.grad(), Tensor(1, 2, 1.0));
}

TEST(Autodiff, GradientsAccumulateAcrossUses) {
  Tape tape;
  Var x = tape.variable(Tensor::scalar(3));
  tape.backward(sum(add(x, x)));
  EXPECT_EQ(x.grad().item(), 2.0);
}

class OpGradients : public ::testing::TestWithParam<int> {};

TEST_P(OpGradients, FiniteDifferences) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const Tensor a = random_tensor(3, 4, rng);
  const Tensor b = random_tensor(4, 2, rng);
  const Tensor c = random_tensor(3, 4, rng);
  const Tensor bias = random_tensor(1, 4, rng);
  Tensor mask(3, 3, 1.0);
  mask(0, 2) = 0.0;
  const std::size_t rows[] = {2, 0};
  const std::size_t cols[] = {3, 1};

  EXPECT_LT(gradcheck([](Tape&, const auto& v) { return sum(matmul(v[0], v[1])); }, {a, b}), 1e-6);
  EXPECT_LT(gradcheck([](Tape&, const auto& v) { return sum(elu(matmul_transposed_b(v[0], v[1]))); }, {a, c}), 1e-6);
  EXPECT_LT(gradcheck([](Tape&, const auto& v) { return squared_norm(sub(v[0], scale(v[1], 0.5))); }, {a, c}), 1e-6);
  EXPECT_LT(gradcheck([](Tape&, const auto& v) { return sum(hadamard(v[0], elu(v[1]))); }, {a, c}), 1e-6);
  EXPECT_LT(gradcheck([](Tape&, const auto& v) { return squared_norm(add_row_bias(v[0], v[1])); }, {a, bias}), 1e-6);
  EXPECT_LT(gradcheck([&](Tape&, const auto& v) {
              return squared_norm(masked_softmax_rows(matmul_transposed_b(v[0], v[1]), mask, 1.7));
            }, {a, c}), 1e-6);
  EXPECT_LT(gradcheck([](Tape&, const auto& v) { return cross_entropy(matmul(sum_rows(v[0]), v[1]), 1); }, {a, b}), 1e-6);
  EXPECT_LT(gradcheck([&](Tape&, const auto& v) {
              return squared_norm(gather_cols(gather_rows(v[0], rows), cols));
            }, {a}), 1e-6);
  EXPECT_LT(gradcheck([](Tape&, const auto& v) {
              const Var parts[] = {v[0], v[1]};
              const Var cat[] = {concat_rows(parts), concat_rows(parts)};
              return squared_norm(elu(concat_cols(cat)));
            }, {a, c}), 1e-6);
  EXPECT_LT(gradcheck([](Tape&, const auto& v) {
              const Var s[] = {sum(v[0]), squared_norm(v[0])};
              return mean_of(s);
            }, {a}), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Seeds, OpGradients, ::testing::Range(0, 10));

TEST(Autodiff, MultiplyConstantAndRelu) {
  std::mt19937_64 rng(3);
  const Tensor a = random_tensor(2, 3, rng);
  const Tensor f = random_tensor(2, 3, rng);
  EXPECT_LT(gradcheck([&](Tape&, const auto& v) { return squared_norm(multiply_constant(relu(v[0]), f)); }, {a}), 1e-6);
}
