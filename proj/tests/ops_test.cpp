#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "ucr/errors.hpp"
#include "ucr/ops.hpp"
#include "ucr/tape.hpp"

namespace ucr {
namespace {

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
    const Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
    const Tensor m = Tensor::matrix(2, 2, {3, 4, 5, 6});
    EXPECT_EQ(matmul(eye, m), m);
}

TEST(Matmul, RowTimesColumn) {
    const Tensor r = matmul(Tensor::matrix(1, 2, {1, 2}), Tensor::matrix(2, 1, {3, 4}));
    EXPECT_EQ(r.shape(), Shape::matrix(1, 1));
    EXPECT_DOUBLE_EQ(r[0], 11.0);
}

TEST(Matmul, MatchesTripleLoop) {
    Rng rng(7);
    const Tensor a = test::random_matrix(rng, 3, 4);
    const Tensor b = test::random_matrix(rng, 4, 2);
    const Tensor c = matmul(a, b);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) s += a.at(i, k) * b.at(k, j);
            EXPECT_EQ(c.at(i, j), s);
        }
    }
}

TEST(Matmul, VectorTimesMatrix) {
    const Tensor r = matmul(Tensor::vector({1, 2}), Tensor::matrix(2, 3, {1, 0, 2, 0, 1, 3}));
    EXPECT_EQ(r.shape(), Shape::vector(3));
    EXPECT_EQ(r, Tensor::vector({1, 2, 8}));
}

TEST(Matmul, InnerDimensionMismatchThrows) {
    EXPECT_THROW(matmul(Tensor::zeros(Shape::matrix(2, 3)), Tensor::zeros(Shape::matrix(2, 3))), DimensionError);
}

TEST(Dot, HandArithmetic) {
    EXPECT_DOUBLE_EQ(dot(Tensor::vector({1, 2, 3}), Tensor::vector({4, 5, 6})).item(), 32.0);
    EXPECT_DOUBLE_EQ(dot(Tensor::vector({1, 2, 3}), Tensor::zeros(Shape::vector(3))).item(), 0.0);
}

TEST(Dot, MatchesScalarLoopAndIsSymmetric) {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Tensor a = test::random_vector(rng, 64);
        const Tensor b = test::random_vector(rng, 64);
        EXPECT_NEAR(dot(a, b).item(), test::naive_dot(a.values(), b.values()), 1e-12);
        EXPECT_NEAR(dot(a, b).item(), dot(b, a).item(), 1e-12);
    }
}

TEST(Dot, LengthMismatchThrows) {
    EXPECT_THROW(dot(Tensor::vector({1, 2}), Tensor::vector({1, 2, 3})), DimensionError);
}

TEST(Softmax, SymmetricInputsGiveEqualWeights) {
    EXPECT_EQ(softmax(Tensor::vector({0, 0})), Tensor::vector({0.5, 0.5}));
    EXPECT_EQ(softmax(Tensor::vector({1000, 1000})), Tensor::vector({0.5, 0.5}));
}

TEST(Softmax, MatchesDirectExponentiation) {
    const Tensor s = softmax(Tensor::vector({1, 2, 3}));
    const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s[i], std::exp(static_cast<double>(i + 1)) / z, 1e-15);
    EXPECT_NEAR(s[0], 0.090031, 1e-6);
    EXPECT_NEAR(s[1], 0.244728, 1e-6);
    EXPECT_NEAR(s[2], 0.665241, 1e-6);
}

TEST(Softmax, SumsToOneForLargeMagnitudes) {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 1 + rng.index(10);
        const Tensor s = softmax(test::random_vector(rng, n, -1e3, 1e3));
        double total = 0.0;
        for (double v : s.values()) {
            EXPECT_GT(v, 0.0 - 1e-300);
            total += v;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Softmax, EmptyInputThrows) { EXPECT_THROW(softmax(Tensor::vector({})), DimensionError); }

TEST(Sigmoid, KnownValues) {
    EXPECT_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5);
    EXPECT_NEAR(sigmoid(Tensor::scalar(1.0)).item(), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
    EXPECT_NEAR(sigmoid(Tensor::scalar(1.0)).item(), 0.731059, 1e-6);
    const double tiny = sigmoid(Tensor::scalar(-50.0)).item();
    EXPECT_GT(tiny, 0.0);
    EXPECT_LE(tiny, 1e-20);
    EXPECT_LE(sigmoid(Tensor::scalar(50.0)).item(), 1.0);
    EXPECT_GT(sigmoid(Tensor::scalar(50.0)).item(), 1.0 - 1e-15);
}

TEST(Elementwise, AddSubMulScale) {
    const Tensor a = Tensor::vector({1, 2, 3});
    const Tensor b = Tensor::vector({4, 5, 6});
    EXPECT_EQ(add(a, b), Tensor::vector({5, 7, 9}));
    EXPECT_EQ(sub(a, b), Tensor::vector({-3, -3, -3}));
    EXPECT_EQ(mul(a, b), Tensor::vector({4, 10, 18}));
    EXPECT_EQ(scale(a, 2.0), Tensor::vector({2, 4, 6}));
    EXPECT_THROW(add(a, Tensor::vector({1, 2})), DimensionError);
}

TEST(Elementwise, MatrixPlusRowVectorBroadcasts) {
    const Tensor m = Tensor::matrix(2, 2, {1, 2, 3, 4});
    EXPECT_EQ(add(m, Tensor::vector({10, 20})), Tensor::matrix(2, 2, {11, 22, 13, 24}));
}

TEST(Elementwise, ExpLogInverse) {
    const Tensor x = Tensor::vector({0.5, 1.5, 2.5});
    const Tensor y = log(exp(x));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(y[i], x[i], 1e-15);
}

TEST(Composites, TanhMatchesStd) {
    Rng rng(5);
    const Tensor x = test::random_vector(rng, 50, -5, 5);
    const Tensor t = tanh(x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(t[i], std::tanh(x[i]), 1e-14);
}

TEST(Composites, LogsumexpIsStable) {
    EXPECT_NEAR(logsumexp(Tensor::vector({1000, 1000})).item(), 1000 + std::log(2.0), 1e-9);
    EXPECT_NEAR(logsumexp(Tensor::vector({0, 0, 0})).item(), std::log(3.0), 1e-15);
}

TEST(Composites, RowElementSumMean) {
    const Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(row(m, 1), Tensor::vector({4, 5, 6}));
    EXPECT_EQ(element(Tensor::vector({7, 8}), 1).item(), 8.0);
    EXPECT_EQ(sum(Tensor::vector({1, 2, 3})).item(), 6.0);
    EXPECT_EQ(mean(Tensor::vector({1, 2, 3})).item(), 2.0);
    EXPECT_THROW(row(m, 2), ContractError);
    EXPECT_THROW(element(Tensor::vector({1}), 1), ContractError);
}

TEST(Composites, ConcatAndStack) {
    const std::vector<Tensor> parts{Tensor::vector({1, 2}), Tensor::vector({3})};
    EXPECT_EQ(concat(parts), Tensor::vector({1, 2, 3}));
    const std::vector<Tensor> rows{Tensor::vector({1, 2}), Tensor::vector({3, 4})};
    EXPECT_EQ(stack(rows), Tensor::matrix(2, 2, {1, 2, 3, 4}));
    const std::vector<Tensor> ragged{Tensor::vector({1, 2}), Tensor::vector({3})};
    EXPECT_THROW(stack(ragged), DimensionError);
}

TEST(Ops, ForwardOutputsStayFinite) {
    Rng rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const Tensor x = test::random_vector(rng, 8, -30, 30);
        EXPECT_TRUE(sigmoid(x).all_finite());
        EXPECT_TRUE(softmax(x).all_finite());
        EXPECT_TRUE(tanh(x).all_finite());
        EXPECT_TRUE(logsumexp(x).all_finite());
    }
}

TEST(Ops, MixingTapesThrows) {
    Tape t1;
    Tape t2;
    const Tensor a = t1.leaf(Tensor::vector({1, 2}));
    const Tensor b = t2.leaf(Tensor::vector({3, 4}));
    EXPECT_THROW(dot(a, b), ContractError);
}

TEST(Ops, ConstantInputsProduceConstants) {
    const Tensor r = add(Tensor::vector({1}), Tensor::vector({2}));
    EXPECT_FALSE(r.requires_grad());
}

}  // namespace
}  // namespace ucr
