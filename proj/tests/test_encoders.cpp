#include "mrfe/eece.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/ops.hpp"
#include "mrfe/sade.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mrfe;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tensor t = Tensor::zeros(std::move(shape));
    fill_uniform(t, 1.0, rng);
    return t;
}

EeceDims dims(std::size_t in, std::size_t d, std::size_t emotions) {
    EeceDims x;
    x.in = in;
    x.embed = d;
    x.hidden = 3;
    x.attention = 4;
    x.emotions = emotions;
    return x;
}

std::vector<std::string> labels(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("e" + std::to_string(i));
    return out;
}

} // namespace

TEST(SadeParamCount, ClosedFormSmallAndLarge) {
    SadeConfig tiny;
    tiny.kernels = {3};
    tiny.d = 1;
    tiny.c = 1;
    EXPECT_EQ(sade_param_count(tiny), 6u);

    SadeConfig big;
    big.d = 768;
    big.c = 128;
    EXPECT_EQ(sade_param_count(big), 113792u);
}

TEST(SadeParamCount, EqualsRegisteredStore) {
    SadeConfig cfg;
    cfg.kernels = {1, 5};
    cfg.d = 6;
    cfg.c = 4;
    ParameterStore store(2);
    sade_init(store, cfg);
    EXPECT_EQ(store.parameter_count(), sade_param_count(cfg));
}

TEST(KernelList, ParsesSortsAndRejects) {
    EXPECT_EQ(parse_kernel_list("7,1,5,3"), (std::vector<std::size_t>{1, 3, 5, 7}));
    EXPECT_EQ(kernel_list_str({1, 3, 5}), "1,3,5");
    EXPECT_THROW(parse_kernel_list("2"), ConfigError);
    EXPECT_THROW(parse_kernel_list("3,3"), ConfigError);
    EXPECT_THROW(parse_kernel_list("0"), ConfigError);
    EXPECT_THROW(parse_kernel_list(""), ConfigError);
    EXPECT_THROW(parse_kernel_list("1,x"), ConfigError);
}

TEST(Sade, SingleKernelEqualsItsBranchBitExactly) {
    SadeConfig cfg;
    cfg.kernels = {3};
    cfg.d = 5;
    cfg.c = 4;
    ParameterStore store(9);
    const auto p = sade_init(store, cfg);
    const auto e = random_tensor({7, 5}, 1);
    const auto out = sade_forward(e, p);
    const auto& br = p.branches.at(3);
    const auto branch = relu(conv1d_depthwise(e, br.weight, br.bias, 3));
    EXPECT_EQ(out.v_pre.to_vector(), branch.to_vector());
    EXPECT_EQ(out.v.to_vector(), conv1d_pointwise(branch, p.pointwise_weight, p.pointwise_bias).to_vector());
}

TEST(Sade, MultiKernelIsMeanOfBranches) {
    SadeConfig cfg;
    cfg.kernels = {1, 3};
    cfg.d = 2;
    cfg.c = 2;
    ParameterStore store(4);
    const auto p = sade_init(store, cfg);
    const auto e = random_tensor({4, 2}, 2);
    const auto out = sade_forward(e, p);
    const auto a = relu(conv1d_depthwise(e, p.branches.at(1).weight, p.branches.at(1).bias, 1));
    const auto b = relu(conv1d_depthwise(e, p.branches.at(3).weight, p.branches.at(3).bias, 3));
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(out.v_pre.data()[i], (a.data()[i] + b.data()[i]) / 2, 1e-6);
}

TEST(Modulation, NegationFlipsHedgeHalvesOthersUnchanged) {
    const auto rules = NegationRules::defaults();
    const std::vector<std::string> tokens{"the", "film", "was", "not", "good", "at", "all", "really"};
    const auto f = modulation_factors(tokens, rules);
    EXPECT_EQ(f, (std::vector<Scalar>{1, 1, 1, 1, -1, -1, -1, 1}));

    const std::vector<std::string> hedged{"it", "was", "slightly", "dull"};
    EXPECT_EQ(modulation_factors(hedged, rules), (std::vector<Scalar>{1, 1, 1, 0.5}));
}

TEST(Modulation, NegationTakesPrecedenceAndMultiwordHedge) {
    const auto rules = NegationRules::defaults();
    const std::vector<std::string> both{"not", "slightly", "bad"};
    EXPECT_EQ(modulation_factors(both, rules)[2], -1);
    const std::vector<std::string> bit{"a", "bit", "slow"};
    EXPECT_EQ(modulation_factors(bit, rules)[2], 0.5);
    EXPECT_EQ(modulation_factors(bit, rules)[1], 1);
}

TEST(Modulation, AppliedExactlyAndReversalIsInvolution) {
    auto rules = NegationRules::defaults();
    rules.lambda = 0.5;
    const auto y = random_tensor({4, 3}, 6);
    const std::vector<std::string> tokens{"never", "fun", "somewhat", "odd"};
    const auto m = negation_modulate(y, tokens, rules);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_EQ(m.at(0, j), y.at(0, j));
        EXPECT_EQ(m.at(1, j), -y.at(1, j));
        EXPECT_EQ(m.at(2, j), -y.at(2, j));   // "never" still within the window
        EXPECT_EQ(m.at(3, j), -y.at(3, j));
    }
    const auto h = negation_modulate(y.detach().clone(), {"x", "barely", "ok", "y"}, rules);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(h.at(2, j), y.at(2, j) * Scalar(0.5));

    const std::vector<std::string> neg{"not", "a", "b", "c"};
    const auto twice = negation_modulate(negation_modulate(y, neg, rules), neg, rules);
    EXPECT_EQ(twice.to_vector(), y.to_vector());
}

TEST(Modulation, WindowBoundary) {
    auto rules = NegationRules::defaults();
    rules.window = 2;
    const std::vector<std::string> tokens{"not", "a", "b", "c"};
    EXPECT_EQ(modulation_factors(tokens, rules), (std::vector<Scalar>{1, -1, -1, 1}));
    rules.window = 0;
    EXPECT_THROW(rules.validate(), ConfigError);
}

TEST(Attention, WeightsFormSimplex) {
    ParameterStore store(3);
    const auto p = eece_init(store, dims(4, 4, 2), labels(2));
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const auto h = random_tensor({1 + trial % 12, 6}, trial);
        const auto a = attention_pool(h, p.attention);
        double s = 0;
        for (auto v : a.alpha.data()) {
            EXPECT_GE(v, 0);
            s += v;
        }
        EXPECT_NEAR(s, 1.0, 1e-5);
    }
}

TEST(EmotionSpace, ProjectionRowsFormSimplex) {
    ParameterStore store(3);
    const auto p = eece_init(store, dims(4, 4, 5), labels(5));
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const auto e = emotion_project(random_tensor({3, 6}, trial), p.space);
        for (std::size_t t = 0; t < 3; ++t) {
            double s = 0;
            for (std::size_t j = 0; j < 5; ++j) s += e.at(t, j);
            EXPECT_NEAR(s, 1.0, 1e-5);
        }
    }
}

TEST(Fusion, ZeroEmotionSignalLeavesStatesBitIdentical) {
    ParameterStore store(3);
    const auto p = eece_init(store, dims(4, 4, 3), labels(3));
    const auto h = random_tensor({5, 6}, 1);
    const auto alpha = softmax_rows(random_tensor({5}, 2));
    for (bool gate : {true, false}) {
        const auto f = fuse_residual(h, Tensor::zeros({5, 3}), alpha, p.space, gate);
        EXPECT_EQ(f.h_tilde.to_vector(), h.to_vector());
    }
}

TEST(Fusion, SignalIsAlphaWeightedEmotionSum) {
    ParameterStore store(3);
    auto p = eece_init(store, dims(4, 4, 2), labels(2));
    const auto h = random_tensor({2, 6}, 1);
    const auto y = Tensor::matrix(2, 2, {1, 3, -2, 4});
    const auto f = fuse_residual(h, y, softmax_rows(Tensor::vector({0, 0})), p.space, false);
    // zero alpha logits ⇒ α_e = (½, ½)
    EXPECT_NEAR(f.alpha_e.at(0), 0.5, 1e-7);
    EXPECT_NEAR(f.signal.at(0), 2.0, 1e-6);
    EXPECT_NEAR(f.signal.at(1), 1.0, 1e-6);
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(f.h_tilde.at(1, j), h.at(1, j) + 1.0, 1e-6);
}

TEST(Eece, EndToEndShapes) {
    ParameterStore store(3);
    const auto p = eece_init(store, dims(5, 4, 3), labels(3));
    const auto out = eece_forward(random_tensor({6, 5}, 1), random_tensor({6, 4}, 2),
                                  {"a", "not", "b", "c", "d", "e"}, p, NegationRules::defaults(), true);
    EXPECT_EQ(out.h.shape(), (Shape{6, 6}));
    EXPECT_EQ(out.y_mod.shape(), (Shape{6, 3}));
    EXPECT_EQ(out.fusion.c_tilde.shape(), (Shape{6}));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out.y_mod.at(2, j), -out.y.at(2, j));
}

TEST(EmotionLexicon, ParsesCuesAndRejectsDuplicates) {
    std::istringstream in("# comment\njoy: happy glad\nanger: mad\nnegation: not never\nhedge: barely\n");
    const auto lex = parse_emotion_lexicon(in);
    ASSERT_EQ(lex.emotions.size(), 2u);
    EXPECT_EQ(lex.emotions[0].first, "joy");
    EXPECT_EQ(lex.emotions[0].second, (std::vector<std::string>{"happy", "glad"}));
    EXPECT_EQ(*lex.negation_cues, (std::vector<std::string>{"not", "never"}));
    EXPECT_EQ(*lex.hedge_cues, (std::vector<std::string>{"barely"}));

    std::istringstream dup("joy: a\njoy: b\n");
    EXPECT_THROW(parse_emotion_lexicon(dup), ParseError);
    EXPECT_GE(EmotionLexicon::builtin().emotions.size(), 2u);
}
