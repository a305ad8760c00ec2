#include "mrfe/gradcheck.hpp"
#include "mrfe/ops.hpp"

#include <gtest/gtest.h>

using namespace mrfe;

TEST(FiniteDifference, QuadraticHasExactGradient) {
    ParameterStore store(1);
    auto x = store.add("x", Tensor::vector({1.5, -2.0, 0.25}));
    const auto r = finite_difference_check([&] { return sum(mul(x, x)); }, store);
    EXPECT_LT(r.max_relative_error, 1e-9);
    EXPECT_EQ(r.coordinates, 3u);
}

TEST(FiniteDifference, DetectsAWrongGradient) {
    // max_over_time with a tie-free input, but the loss rebuilds with a different
    // constant each call, so analytic and numeric slopes disagree.
    ParameterStore store(1);
    auto x = store.add("x", Tensor::vector({1.0}));
    int calls = 0;
    const auto r = finite_difference_check(
        [&] {
            ++calls;
            return scale(sum(x), calls == 1 ? 1.0 : 3.0);
        },
        store);
    EXPECT_GT(r.max_relative_error, 0.4);
}

TEST(GradcheckSuite, EveryLayerAndMicroModelBelowTolerance) {
    const auto cases = gradcheck_suite(5);
    ASSERT_GE(cases.size(), 15u);
    bool saw_model = false;
    for (const auto& c : cases) {
        EXPECT_LT(c.result.max_relative_error, 1e-3) << c.name << " worst " << c.result.worst_parameter;
        EXPECT_GT(c.result.coordinates, 0u) << c.name;
        saw_model = saw_model || c.name == "micro model sequential";
    }
    EXPECT_TRUE(saw_model);
}

TEST(GradcheckSuite, HoldsAcrossSeeds) {
    for (std::uint64_t seed : {21, 77}) {
        for (const auto& c : gradcheck_suite(seed)) EXPECT_LT(c.result.max_relative_error, 1e-3) << c.name;
    }
}
