#include "mrfe/corpus.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/model.hpp"
#include "mrfe/ops.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mrfe;

namespace {

ModelConfig small(Variant v = Variant::cisea_mrfe) {
    ModelConfig cfg;
    cfg.apply("variant", to_string(v));
    cfg.embed_dim = 8;
    cfg.channels = 6;
    cfg.hidden = 4;
    cfg.attention_dim = 3;
    cfg.kernels = {1, 3};
    cfg.max_len = 20;
    cfg.dropout = 0.0;
    return cfg;
}

Vocab toy_vocab() {
    return build_vocab({"the movie was great fun", "not a good movie", "awful plot and bad acting"}, 100);
}

Tensor random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<Scalar> v(n);
    for (auto& x : v) x = static_cast<Scalar>(3.0 * g(rng));
    return Tensor::vector(v);
}

} // namespace

TEST(ModelParams, ClosedFormEqualsStoreAcrossConfigurations) {
    const auto vocab = toy_vocab();
    std::size_t checked = 0;
    for (auto v : {Variant::cisea_sade, Variant::cisea_eece, Variant::ci_mrfe, Variant::cisea_mrfe}) {
        for (auto f : {Fusion::sequential, Fusion::attention_stack, Fusion::summation}) {
            for (auto enc : {LocalEncoder::sade, LocalEncoder::conv}) {
                for (auto head : {HeadInput::max_pool, HeadInput::context}) {
                    auto cfg = small(v);
                    cfg.fusion = f;
                    cfg.local_encoder = enc;
                    cfg.head_input = head;
                    try {
                        cfg.validate();
                    } catch (const ConfigError&) {
                        continue;
                    }
                    const Model m(cfg, vocab, 1);
                    EXPECT_EQ(model_param_count(cfg, vocab.size(), m.emotion_labels().size()),
                              m.params().parameter_count())
                        << to_string(v) << " " << to_string(f) << " " << to_string(enc) << " " << to_string(head);
                    ++checked;
                }
            }
        }
    }
    EXPECT_GE(checked, 10u);
}

TEST(ModelParams, SameSeedSameValues) {
    const Model a(small(), toy_vocab(), 9), b(small(), toy_vocab(), 9), c(small(), toy_vocab(), 10);
    auto ia = a.params().begin();
    auto ic = c.params().begin();
    bool any_diff = false;
    for (const auto& [name, t] : b.params()) {
        EXPECT_EQ(ia->second.to_vector(), t.to_vector()) << name;
        any_diff |= ic->second.to_vector() != t.to_vector();
        ++ia;
        ++ic;
    }
    EXPECT_TRUE(any_diff);
}

TEST(ModelConfig, KeyValueRoundTripAndVariantImpliesSea) {
    ModelConfig cfg = small(Variant::cisea_sade);
    cfg.fusion = Fusion::sequential;
    cfg.head_input = HeadInput::max_pool;
    cfg.domain = "restaurant";
    ModelConfig back;
    for (const auto& [k, v] : cfg.to_kv()) EXPECT_TRUE(back.apply(k, v)) << k;
    EXPECT_EQ(back, cfg);
    EXPECT_FALSE(back.apply("no_such_key", "1"));
    back.apply("variant", "ci_mrfe");
    EXPECT_FALSE(back.use_sea);
    back.apply("variant", "cisea_mrfe");
    EXPECT_TRUE(back.use_sea);
    EXPECT_THROW(back.apply("fusion", "concat"), ConfigError);
    EXPECT_THROW(back.apply("kernels", "2"), ConfigError);
}

TEST(ModelConfig, ValidateRejectsInconsistentFlags) {
    auto bad = [](auto edit) {
        auto cfg = small();
        edit(cfg);
        return cfg;
    };
    EXPECT_THROW(bad([](ModelConfig& c) { c.embed_dim = 0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](ModelConfig& c) { c.classes = 1; }).validate(), ConfigError);
    EXPECT_THROW(bad([](ModelConfig& c) { c.dropout = 1.0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](ModelConfig& c) { c.hedge_lambda = 1.0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](ModelConfig& c) {
                     c.variant = Variant::ci_mrfe;
                     c.use_sea = true;
                 }).validate(),
                 ConfigError);
    EXPECT_THROW(bad([](ModelConfig& c) {
                     c.apply("variant", "cisea_sade");
                     c.fusion = Fusion::summation;
                 }).validate(),
                 ConfigError);
    EXPECT_THROW(bad([](ModelConfig& c) {
                     c.apply("variant", "cisea_sade");
                     c.head_input = HeadInput::context;
                 }).validate(),
                 ConfigError);
    EXPECT_THROW(bad([](ModelConfig& c) {
                     c.apply("variant", "cisea_eece");
                     c.local_encoder = LocalEncoder::conv;
                 }).validate(),
                 ConfigError);
    EXPECT_THROW(Model(bad([](ModelConfig& c) { c.kernels = {}; }), toy_vocab(), 1), ConfigError);
}

TEST(StreamFusion, AttentionWeightsFormSimplexAndSummationIsMean) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        FusionParams p{random_vector(12, rng), random_vector(3, rng), random_vector(24, rng),
                       random_vector(3, rng), random_vector(3, rng), random_vector(1, rng)};
        p.proj_v_w = reshape(p.proj_v_w, {3, 4});
        p.proj_h_w = reshape(p.proj_h_w, {3, 8});
        p.score_w = reshape(p.score_w, {1, 3});
        const auto v = random_vector(4, rng), h = random_vector(8, rng);
        const auto att = fuse_streams(v, h, Fusion::attention_stack, p);
        ASSERT_TRUE(att.weights.has_value());
        const auto w = att.weights->to_vector();
        EXPECT_NEAR(static_cast<double>(w[0]) + w[1], 1.0, 1e-5);
        EXPECT_GE(w[0], 0);
        EXPECT_GE(w[1], 0);

        const auto sum_mode = fuse_streams(v, h, Fusion::summation, p);
        EXPECT_FALSE(sum_mode.weights.has_value());
        const auto pv = linear(v, p.proj_v_w, p.proj_v_b).to_vector();
        const auto ph = linear(h, p.proj_h_w, p.proj_h_b).to_vector();
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(sum_mode.out.at(i), 0.5 * (pv[i] + ph[i]), 1e-5);
    }
    FusionParams p;
    EXPECT_THROW(fuse_streams(Tensor::vector({1}), Tensor::vector({1}), Fusion::sequential, p), ConfigError);
}

TEST(Model, PredictionIsDistributionAndEvalIsDeterministic) {
    for (auto f : {Fusion::sequential, Fusion::attention_stack, Fusion::summation}) {
        auto cfg = small();
        cfg.fusion = f;
        cfg.dropout = 0.3;
        const Model m(cfg, toy_vocab(), 4);
        const auto a = m.predict("not a good movie");
        const auto b = m.predict("not a good movie");
        EXPECT_EQ(a.logits.to_vector(), b.logits.to_vector());
        double total = 0;
        for (auto x : a.probs.to_vector()) total += x;
        EXPECT_NEAR(total, 1.0, 1e-5);
        const auto trace = m.forward(m.encode("the movie was great fun"), false);
        EXPECT_EQ(trace.fusion.has_value(), f != Fusion::sequential);
        EXPECT_TRUE(trace.eece.has_value());
    }
}

TEST(Model, PrepareWrapsOnlyWithInstructions) {
    auto cfg = small();
    cfg.domain = "movie";
    const Model with(cfg, toy_vocab(), 1);
    EXPECT_NE(with.prepare("great fun"), "great fun");
    EXPECT_NE(with.prepare("great fun").find("great fun"), std::string::npos);
    cfg.use_ci = false;
    const Model without(cfg, toy_vocab(), 1);
    EXPECT_EQ(without.prepare("great fun"), "great fun");
}

TEST(Model, EncodeRespectsMaxLenAndUnknownTokens) {
    auto cfg = small();
    cfg.use_ci = false;
    cfg.max_len = 5;
    const Model m(cfg, toy_vocab(), 1);
    const auto seq = m.encode("zebra movie movie movie movie movie movie");
    EXPECT_LE(seq.ids.size(), 5u);
    EXPECT_EQ(seq.ids.size(), seq.tokens.size());
    EXPECT_NE(std::find(seq.ids.begin(), seq.ids.end(), std::size_t{1}), seq.ids.end());
}

TEST(Model, ForwardEmbeddedRejectsWrongWidth) {
    const Model m(small(), toy_vocab(), 1);
    EXPECT_THROW(m.forward_embedded(Tensor::zeros({3, 7}), {"a", "b", "c"}, false), DimensionError);
}
