#include "mrfe/errors.hpp"
#include "mrfe/metrics.hpp"
#include "mrfe/optimizer.hpp"
#include "mrfe/parameter_store.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <utility>

using namespace mrfe;

namespace {

struct Oracle {
    double accuracy;
    double macro_f1;
};

Oracle brute_force(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t classes) {
    std::size_t correct = 0;
    for (auto [t, p] : pairs) correct += t == p;
    double f1_sum = 0;
    for (std::size_t k = 0; k < classes; ++k) {
        std::uint64_t tp = 0, fp = 0, fn = 0;
        for (auto [t, p] : pairs) {
            if (t == k && p == k) ++tp;
            else if (p == k) ++fp;
            else if (t == k) ++fn;
        }
        const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        f1_sum += precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    }
    return {pairs.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pairs.size()),
            f1_sum / static_cast<double>(classes)};
}

} // namespace

TEST(Metrics, ThreeOfFourIsPointSevenFive) {
    ConfusionMatrix cm(2);
    cm.add(0, 0);
    cm.add(0, 0);
    cm.add(1, 1);
    cm.add(1, 0);
    EXPECT_EQ(accuracy(cm), 0.75);
    // class 0: p = 2/3, r = 1 → 0.8; class 1: p = 1, r = 1/2 → 2/3
    EXPECT_DOUBLE_EQ(macro_f1(cm), (0.8 + 2.0 / 3.0) / 2.0);
}

TEST(Metrics, MatchBruteForceOnRandomMatrices) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t classes = 2 + rng() % 5;
        const std::size_t n = rng() % 60;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        ConfusionMatrix cm(classes);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t t = rng() % classes;
            // Biased toward the diagonal so both easy and hard matrices appear.
            const std::size_t p = rng() % 3 == 0 ? rng() % classes : t;
            pairs.emplace_back(t, p);
            cm.add(t, p);
        }
        const auto o = brute_force(pairs, classes);
        EXPECT_EQ(cm.total(), n);
        EXPECT_EQ(accuracy(cm), o.accuracy) << "trial " << trial;
        EXPECT_EQ(macro_f1(cm), o.macro_f1) << "trial " << trial;
    }
}

TEST(Metrics, FromCountsAndErrors) {
    const auto cm = ConfusionMatrix::from_counts({{5, 1}, {2, 2}});
    EXPECT_EQ(cm.total(), 10u);
    EXPECT_EQ(cm.correct(), 7u);
    const auto r = make_report(cm);
    EXPECT_EQ(r.accuracy, 0.7);
    ASSERT_EQ(r.per_class.size(), 2u);
    EXPECT_EQ(r.per_class[0].support, 6u);
    EXPECT_DOUBLE_EQ(r.per_class[1].precision, 2.0 / 3.0);
    EXPECT_ANY_THROW(ConfusionMatrix::from_counts({{1, 2}, {3}}));
    ConfusionMatrix small(2);
    EXPECT_ANY_THROW(small.add(2, 0));
    EXPECT_EQ(accuracy(ConfusionMatrix(3)), 0.0);
}

TEST(Welch, MatchesHighPrecisionReferences) {
    struct Fixture {
        std::vector<double> a, b;
        double t, df, p;
    };
    // References evaluated independently at 50 significant digits.
    const std::vector<Fixture> fixtures{
        {{27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4},
         {27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4},
         -2.4553563982860050625, 24.988529290231414357, 0.021378001462867032492},
        {{0.95, 0.96, 0.94, 0.97, 0.955},
         {0.93, 0.94, 0.92, 0.945, 0.935, 0.925},
         3.5762373640756182776, 7.8820960698689956332, 0.0074066615083158473893},
        {{1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
         {3, 3.5, 12, -1, 20},
         -0.51355259101309549937, 4.5228539026675213254, 0.63164803848363678151},
    };
    for (const auto& f : fixtures) {
        const auto r = welch_ttest(f.a, f.b);
        EXPECT_NEAR(r.t, f.t, 1e-9);
        EXPECT_NEAR(r.df, f.df, 1e-9);
        EXPECT_NEAR(r.p, f.p, 1e-9);
        const auto swapped = welch_ttest(f.b, f.a);
        EXPECT_NEAR(swapped.t, -f.t, 1e-9);
        EXPECT_NEAR(swapped.p, f.p, 1e-9);
    }
}

TEST(Welch, IdenticalSamplesAndErrors) {
    const std::vector<double> a{0.81, 0.83, 0.80, 0.84};
    const auto r = welch_ttest(a, a);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_EQ(r.p, 1.0);
    const std::vector<double> flat{0.5, 0.5, 0.5};
    const auto z = welch_ttest(flat, flat);
    EXPECT_EQ(z.t, 0.0);
    EXPECT_EQ(z.p, 1.0);
    EXPECT_THROW(welch_ttest({1.0}, a), InputError);
    EXPECT_THROW(welch_ttest(a, {}), InputError);
}

TEST(AdamW, SingleStepMatchesHandComputation) {
    ParameterStore store;
    auto w = store.add("w", Tensor::vector({1.0, -2.0}));
    auto g = w.mutable_grad();
    g[0] = 0.5;
    g[1] = -0.25;
    AdamWConfig cfg{.lr = 0.1, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8, .weight_decay = 0.01};
    AdamWState state;
    adamw_step(store, state, cfg);
    EXPECT_EQ(state.step, 1u);
    auto expected = [&](double theta, double grad) {
        const double m_hat = (0.1 * grad) / (1 - 0.9);
        const double v_hat = (0.001 * grad * grad) / (1 - 0.999);
        return theta * (1 - 0.1 * 0.01) - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8);
    };
    EXPECT_NEAR(w.at(0), expected(1.0, 0.5), 1e-6);
    EXPECT_NEAR(w.at(1), expected(-2.0, -0.25), 1e-6);

    // Second step with the same gradient, moments carried over.
    adamw_step(store, state, cfg);
    const double m = 0.9 * 0.05 + 0.1 * 0.5, v = 0.999 * 0.00025 + 0.001 * 0.25;
    const double theta1 = expected(1.0, 0.5);
    const double theta2 = theta1 * (1 - 0.001) - 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
    EXPECT_NEAR(w.at(0), theta2, 1e-6);
}

TEST(AdamW, DecayOnlyShrinksAndZeroDecayIsAdam) {
    ParameterStore store;
    auto w = store.add("w", Tensor::vector({3.0, -4.0}));
    AdamWConfig cfg{.lr = 0.1, .weight_decay = 0.5};
    AdamWState state;
    adamw_step(store, state, cfg);
    EXPECT_NEAR(w.at(0), 3.0 * 0.95, 1e-6);
    EXPECT_NEAR(w.at(1), -4.0 * 0.95, 1e-6);

    ParameterStore plain;
    auto p = plain.add("p", Tensor::vector({1.0}));
    p.mutable_grad()[0] = 2.0;
    AdamWState s2;
    adamw_step(plain, s2, AdamWConfig{.lr = 0.01, .weight_decay = 0.0});
    EXPECT_NEAR(p.at(0), 1.0 - 0.01, 1e-6);   // first Adam step moves by lr·sign(g)
}

TEST(AdamW, ValidateRejectsBadHyperparameters) {
    EXPECT_THROW((AdamWConfig{.lr = 0}.validate()), ConfigError);
    EXPECT_THROW((AdamWConfig{.beta1 = 1.0}.validate()), ConfigError);
    EXPECT_THROW((AdamWConfig{.weight_decay = -1}.validate()), ConfigError);
    EXPECT_NO_THROW(AdamWConfig{}.validate());
}
