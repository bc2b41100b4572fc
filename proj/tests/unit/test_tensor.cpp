#include <gtest/gtest.h>

#include <cmath>

#include "dotin/errors.hpp"
#include "dotin/tensor.hpp"

using namespace dotin;

TEST(Tensor, ShapeMustMatchValues) {
  EXPECT_THROW(Tensor(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
  const Tensor t(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.shape(), (Shape{2, 3}));
  EXPECT_EQ(t(1, 0), 4.0);
}

TEST(Tensor, MatmulIdentity) {
  const Tensor b = Tensor::from_rows({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(Tensor::identity(2), b), b);
}

TEST(Tensor, MatmulByHand) {
  EXPECT_EQ(matmul(Tensor::from_rows({{1, 2}}), Tensor::from_rows({{3}, {4}})),
            Tensor::from_rows({{11}}));
  EXPECT_EQ(matmul(Tensor::from_rows({{2, 0}, {0, 2}}), Tensor::from_rows({{1, 1}, {1, 1}})),
            Tensor::from_rows({{2, 2}, {2, 2}}));
}

TEST(Tensor, MatmulShapeMismatchNamesShapes) {
  try {
    (void)matmul(Tensor(2, 3), Tensor(2, 3));
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos) << e.what();
  }
}

TEST(Tensor, TransposedProductsAgree) {
  const Tensor a = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  const Tensor b = Tensor::from_rows({{1, 0, 2}, {0, 1, 1}});
  EXPECT_EQ(matmul_transposed_b(a, b), matmul(a, transpose(b)));
  EXPECT_EQ(matmul_transposed_a(a, b), matmul(transpose(a), b));
}

TEST(MaskedSoftmax, Examples) {
  const std::vector<bool> all{true, true, true};
  for (double v : masked_softmax(std::vector<double>{0, 0, 0}, all, 1.0)) EXPECT_NEAR(v, 1.0 / 3, 1e-15);
  const auto two = masked_softmax(std::vector<double>{std::log(2.0), 0}, {true, true}, 1.0);
  EXPECT_NEAR(two[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(two[1], 1.0 / 3, 1e-15);
  const auto one = masked_softmax(std::vector<double>{5, 100}, {true, false}, 1.0);
  EXPECT_EQ(one[0], 1.0);
  EXPECT_EQ(one[1], 0.0);
}

TEST(MaskedSoftmax, Errors) {
  EXPECT_THROW((void)masked_softmax(std::vector<double>{1, 2}, {false, false}, 1.0), EmptySupportError);
  EXPECT_THROW((void)masked_softmax(std::vector<double>{1, 2}, {true, true}, 0.0), DomainError);
}

TEST(MaskedSoftmax, LargeLogitsStayFinite) {
  const auto s = masked_softmax(std::vector<double>{1000, 999}, {true, true}, 1.0);
  EXPECT_NEAR(s[0] + s[1], 1.0, 1e-15);
  EXPECT_TRUE(std::isfinite(s[0]));
}

TEST(Elu, Examples) {
  EXPECT_EQ(elu(0.0), 0.0);
  EXPECT_EQ(elu(1.0), 1.0);
  EXPECT_NEAR(elu(-1.0), std::exp(-1.0) - 1.0, 1e-15);
}

TEST(CrossEntropy, Examples) {
  EXPECT_NEAR(cross_entropy_from_logits(std::vector<double>{0, 0}, 0), std::log(2.0), 1e-15);
  EXPECT_LT(cross_entropy_from_logits(std::vector<double>{10, -10}, 0), 1e-8);
  EXPECT_NEAR(cross_entropy_from_logits(std::vector<double>{0, std::log(3.0)}, 1), std::log(4.0 / 3), 1e-15);
  EXPECT_THROW((void)cross_entropy_from_logits(std::vector<double>{0, 0}, 2), IndexError);
}
