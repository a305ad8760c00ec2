#include "mrfe/errors.hpp"
#include "mrfe/ops.hpp"
#include "mrfe/parameter_store.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mrfe;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double bound = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    fill_uniform(t, bound, rng);
    return t;
}

// Zero-padded "same" depthwise convolution, straight from the definition.
std::vector<double> naive_depthwise(const Tensor& e, const Tensor& w, const Tensor& b, std::size_t k) {
    const long n = static_cast<long>(e.dim(0));
    const std::size_t d = e.dim(1);
    const long pad = static_cast<long>(k / 2);
    std::vector<double> out(e.numel());
    for (long t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            double s = b.at(j);
            for (std::size_t r = 0; r < k; ++r) {
                const long src = t + static_cast<long>(r) - pad;
                if (src >= 0 && src < n) s += double(w.at(j, r)) * e.at(static_cast<std::size_t>(src), j);
            }
            out[static_cast<std::size_t>(t) * d + j] = s;
        }
    }
    return out;
}

} // namespace

TEST(Matmul, MatchesTripleLoop) {
    std::mt19937_64 rng(3);
    const auto a = random_tensor({4, 5}, rng);
    const auto b = random_tensor({5, 3}, rng);
    const auto c = matmul(a, b);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < 5; ++k) s += double(a.at(i, k)) * b.at(k, j);
            EXPECT_NEAR(c.at(i, j), s, 1e-6);
        }
    }
}

TEST(Matmul, RejectsMismatchedShapes) {
    EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), DimensionError);
}

TEST(Linear, GradientOfSumIsColumnSums) {
    const auto x = Tensor::matrix(2, 2, {1, 2, 3, 4}, true);
    const auto w = Tensor::matrix(1, 2, {0.5f, -1}, true);
    sum(linear(x, w)).backward();
    EXPECT_FLOAT_EQ(w.grad()[0], 4);
    EXPECT_FLOAT_EQ(w.grad()[1], 6);
    EXPECT_FLOAT_EQ(x.grad()[0], 0.5f);
    EXPECT_FLOAT_EQ(x.grad()[3], -1);
}

TEST(DepthwiseConv, MatchesNaiveOracleOverSeeds) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t n = 1 + seed % 16, d = 1 + (seed / 3) % 8;
        for (std::size_t k : {1, 3, 5, 7}) {
            const auto e = random_tensor({n, d}, rng);
            const auto w = random_tensor({d, k}, rng);
            const auto b = random_tensor({d}, rng);
            const auto got = conv1d_depthwise(e, w, b, k);
            const auto want = naive_depthwise(e, w, b, k);
            for (std::size_t i = 0; i < want.size(); ++i) ASSERT_NEAR(got.data()[i], want[i], 1e-5) << seed;
        }
    }
}

TEST(DepthwiseConv, KernelOneIsElementwiseScale) {
    const auto e = Tensor::matrix(2, 2, {1, 2, 3, 4});
    const auto w = Tensor::matrix(2, 1, {2, -1});
    const auto out = conv1d_depthwise(e, w, Tensor::vector({0, 1}), 1);
    EXPECT_EQ(out.to_vector(), (std::vector<Scalar>{2, -1, 6, -3}));
}

TEST(DepthwiseConv, RejectsEvenKernel) {
    EXPECT_THROW(conv1d_depthwise(Tensor::zeros({3, 2}), Tensor::zeros({2, 2}), Tensor::zeros({2}), 2), ConfigError);
}

TEST(FullConv, MatchesNaiveOracle) {
    std::mt19937_64 rng(9);
    const std::size_t n = 7, d = 4, c = 5;
    const auto e = random_tensor({n, d}, rng);
    const auto w = random_tensor({c, d, 3}, rng);
    const auto b = random_tensor({c}, rng);
    const auto out = conv1d_full(e, w, b);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t o = 0; o < c; ++o) {
            double s = b.at(o);
            for (std::size_t j = 0; j < d; ++j) {
                for (std::size_t r = 0; r < 3; ++r) {
                    const long src = static_cast<long>(t + r) - 1;
                    if (src >= 0 && src < static_cast<long>(n))
                        s += double(w.data()[(o * d + j) * 3 + r]) * e.at(static_cast<std::size_t>(src), j);
                }
            }
            EXPECT_NEAR(out.at(t, o), s, 1e-5);
        }
    }
}

TEST(Softmax, RowsSumToOne) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_tensor({3, 1 + static_cast<std::size_t>(trial % 9)}, rng, 20.0);
        const auto p = softmax_rows(x);
        for (std::size_t i = 0; i < 3; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < p.dim(1); ++j) {
                EXPECT_GE(p.at(i, j), 0);
                s += p.at(i, j);
            }
            EXPECT_NEAR(s, 1.0, 1e-5);
        }
    }
}

TEST(Softmax, StableForLargeLogits) {
    const auto p = softmax_rows(Tensor::vector({1000, 1000}));
    EXPECT_FLOAT_EQ(p.at(0), 0.5f);
    EXPECT_FLOAT_EQ(p.at(1), 0.5f);
}

TEST(SoftmaxCrossEntropy, GradientIsProbsMinusOneHot) {
    const auto logits = Tensor::vector({1, 2, 0.5f}, true);
    softmax_cross_entropy(logits, 1).backward();
    const auto p = softmax_rows(logits.detach());
    EXPECT_NEAR(logits.grad()[0], p.at(0), 1e-6);
    EXPECT_NEAR(logits.grad()[1], p.at(1) - 1, 1e-6);
    EXPECT_NEAR(logits.grad()[2], p.at(2), 1e-6);
}

TEST(SoftmaxCrossEntropy, UniformLogitsGiveLogC) {
    EXPECT_NEAR(softmax_cross_entropy(Tensor::vector({0, 0, 0, 0}), 2).item(), std::log(4.0), 1e-6);
}

TEST(MaxOverTime, PicksColumnMaximaAndRoutesGradient) {
    const auto h = Tensor::matrix(3, 2, {1, 5, 4, 2, 3, 6}, true);
    const auto m = max_over_time(h);
    EXPECT_EQ(m.to_vector(), (std::vector<Scalar>{4, 6}));
    sum(m).backward();
    EXPECT_EQ(std::vector<Scalar>(h.grad().begin(), h.grad().end()), (std::vector<Scalar>{0, 0, 1, 0, 0, 1}));
}

TEST(MeanOf, SingleItemIsBitIdentical) {
    std::mt19937_64 rng(4);
    const auto x = random_tensor({3, 4}, rng);
    const Tensor items[] = {x};
    EXPECT_EQ(mean_of(items).to_vector(), x.to_vector());
}

TEST(ScaleRows, NegationTwiceRestoresBits) {
    std::mt19937_64 rng(5);
    const auto x = random_tensor({4, 3}, rng);
    const std::vector<Scalar> f{-1, 1, -1, 1};
    EXPECT_EQ(scale_rows(scale_rows(x, f), f).to_vector(), x.to_vector());
}

TEST(GatherRows, AccumulatesRepeatedIds) {
    const auto table = Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6}, true);
    const std::vector<std::size_t> ids{2, 0, 2};
    const auto g = gather_rows(table, ids);
    EXPECT_EQ(g.to_vector(), (std::vector<Scalar>{5, 6, 1, 2, 5, 6}));
    sum(g).backward();
    EXPECT_EQ(std::vector<Scalar>(table.grad().begin(), table.grad().end()), (std::vector<Scalar>{1, 1, 0, 0, 2, 2}));
}

TEST(GatherRows, OutOfRangeIdThrows) {
    const std::vector<std::size_t> ids{3};
    EXPECT_THROW(gather_rows(Tensor::zeros({3, 2}), ids), VocabError);
}

TEST(Dropout, SameSeedSameMaskAndExpectationPreserved) {
    const auto x = Tensor::full({2000}, 1);
    std::mt19937_64 a(8), b(8);
    const auto ya = dropout(x, 0.25, a), yb = dropout(x, 0.25, b);
    EXPECT_EQ(ya.to_vector(), yb.to_vector());
    double s = 0;
    for (auto v : ya.data()) {
        EXPECT_TRUE(v == 0 || std::abs(v - 1 / 0.75) < 1e-6);
        s += v;
    }
    EXPECT_NEAR(s / 2000, 1.0, 0.06);
}

TEST(CosineRows, ParallelAndOrthogonal) {
    const auto a = Tensor::matrix(2, 2, {1, 0, 0, 3});
    const auto p = Tensor::matrix(2, 2, {2, 0, 0, -1});
    const auto c = cosine_rows(a, p);
    EXPECT_NEAR(c.at(0, 0), 1, 1e-6);
    EXPECT_NEAR(c.at(0, 1), 0, 1e-6);
    EXPECT_NEAR(c.at(1, 1), -1, 1e-6);
}

TEST(Lstm, ZeroWeightsGiveZeroStates) {
    // With zero weights and bias every gate is 0.5 and g = 0: c stays 0, h = 0.
    const auto x = Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6});
    const auto h = lstm_direction(x, Tensor::zeros({8, 2}), Tensor::zeros({8, 2}), Tensor::zeros({8}), false);
    for (auto v : h.data()) EXPECT_EQ(v, 0);
}

TEST(Lstm, ReverseOfReversedInputMirrorsForward) {
    std::mt19937_64 rng(12);
    const auto x = random_tensor({5, 3}, rng);
    const auto wi = random_tensor({8, 3}, rng), wh = random_tensor({8, 2}, rng), b = random_tensor({8}, rng);
    std::vector<Scalar> flipped;
    for (std::size_t t = 5; t-- > 0;)
        for (std::size_t j = 0; j < 3; ++j) flipped.push_back(x.at(t, j));
    const auto fwd = lstm_direction(x, wi, wh, b, false);
    const auto bwd = lstm_direction(Tensor::matrix(5, 3, flipped), wi, wh, b, true);
    for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(fwd.at(t, j), bwd.at(4 - t, j));
}

TEST(NoGrad, GuardSkipsGraph) {
    const auto x = Tensor::vector({1, 2}, true);
    NoGradGuard guard;
    EXPECT_FALSE(sum(x).requires_grad());
}
