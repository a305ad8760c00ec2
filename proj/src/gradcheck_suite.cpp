#include "mrfe/eece.hpp"
#include "mrfe/gradcheck.hpp"
#include "mrfe/model.hpp"
#include "mrfe/ops.hpp"
#include "mrfe/sade.hpp"

namespace mrfe::inline MRFE_PRECISION {

namespace {

constexpr std::size_t kN = 6, kD = 8, kC = 6, kH = 4, kDa = 3, kE = 3;

Tensor fixed_weights(Shape shape, std::mt19937_64& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    fill_uniform(t, 1.0, rng);
    return t;
}

// sum(out ⊙ R) for a fixed random R, so every output coordinate matters.
Tensor project(const Tensor& out, std::mt19937_64& rng) { return sum(mul(out, fixed_weights(out.shape(), rng))); }

// The projection generator is reset on every evaluation.
template <typename F>
GradCheckCase check(const std::string& name, ParameterStore& store, std::uint64_t seed, double eps, F build) {
    auto loss = [&] {
        std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
        return build(rng);
    };
    return {name, finite_difference_check(loss, store, eps)};
}

const std::vector<std::string> kTokens{"[CLS]", "not", "good", "movie", "today", "[SEP]"};

EmotionLexicon micro_lexicon() {
    EmotionLexicon lex;
    lex.emotions = {{"joy", {"good"}}, {"anger", {"bad"}}, {"surprise", {"today"}}};
    return lex;
}

ModelConfig micro_config() {
    ModelConfig cfg;
    cfg.embed_dim = kD;
    cfg.channels = kC;
    cfg.hidden = kH;
    cfg.attention_dim = kDa;
    cfg.classes = 2;
    cfg.use_ci = false;
    cfg.max_len = kN;
    cfg.dropout = 0.0;
    return cfg;
}

GradCheckCase model_case(const std::string& name, ModelConfig cfg, std::uint64_t seed, double eps) {
    Model model(std::move(cfg), Vocab::from_tokens({"not", "good", "bad", "movie", "today"}), seed, micro_lexicon());
    const auto seq = model.encode("not good movie today");
    auto l = [&] { return loss(model.forward(seq, false).prediction, 1); };
    return {name, finite_difference_check(l, model.params(), eps)};
}

EeceDims micro_dims(std::size_t in) {
    EeceDims dims;
    dims.in = in;
    dims.embed = kD;
    dims.hidden = kH;
    dims.attention = kDa;
    dims.emotions = kE;
    return dims;
}

std::vector<std::string> micro_labels() { return {"joy", "anger", "surprise"}; }

// Nonzero prototypes and emotion weights so the compatibility and fusion paths carry gradient.
void randomize(ParameterStore& store, const std::vector<std::string>& names) {
    for (const auto& n : names) fill_uniform(store.get(n), 0.8, store.rng());
}

} // namespace

std::vector<GradCheckCase> gradcheck_suite(std::uint64_t seed, double eps) {
    std::vector<GradCheckCase> out;

    {
        ParameterStore s(seed);
        auto x = s.add_uniform("x", {kN, kD}, 1);
        auto w = s.add_uniform("w", {kC, kD}, kD);
        auto b = s.add_uniform("b", {kC}, kD);
        out.push_back(check("linear", s, seed, eps, [&](auto& rng) { return project(linear(x, w, b), rng); }));
    }
    for (std::size_t k : {1, 3, 5, 7}) {
        ParameterStore s(seed + k);
        auto e = s.add_uniform("e", {kN, kD}, 1);
        auto w = s.add_uniform("w", {kD, k}, k);
        auto b = s.add_uniform("b", {kD}, k);
        out.push_back(check("depthwise k=" + std::to_string(k), s, seed, eps,
                            [&](auto& rng) { return project(conv1d_depthwise(e, w, b, k), rng); }));
    }
    {
        ParameterStore s(seed);
        auto e = s.add_uniform("e", {kN, kD}, 1);
        SadeConfig cfg;
        cfg.d = kD;
        cfg.c = kC;
        const auto p = sade_init(s, cfg);
        out.push_back(check("sade", s, seed, eps, [&](auto& rng) { return project(sade_forward(e, p).v, rng); }));
    }
    {
        ParameterStore s(seed);
        auto e = s.add_uniform("e", {kN, kD}, 1);
        auto w = s.add_uniform("w", {kC, kD, 3}, kD * 3);
        auto b = s.add_uniform("b", {kC}, kD * 3);
        out.push_back(check("conv1d", s, seed, eps, [&](auto& rng) { return project(conv1d_full(e, w, b), rng); }));
    }
    {
        ParameterStore s(seed);
        auto v = s.add_uniform("v", {kN, kC}, 1);
        const auto p = eece_init(s, micro_dims(kC), micro_labels());
        out.push_back(check("bilstm", s, seed, eps, [&](auto& rng) { return project(bilstm_forward(v, p.lstm), rng); }));
    }
    {
        ParameterStore s(seed);
        auto h = s.add_uniform("h", {kN, 2 * kH}, 1);
        const auto p = eece_init(s, micro_dims(kC), micro_labels());
        out.push_back(check("attention", s, seed, eps, [&](auto& rng) {
            const auto a = attention_pool(h, p.attention);
            return add(project(a.context, rng), project(a.alpha, rng));
        }));
    }
    {
        ParameterStore s(seed);
        auto h = s.add_uniform("h", {kN, 2 * kH}, 1);
        auto e = s.add_uniform("e", {kN, kD}, 1);
        auto alpha = s.add_uniform("alpha", {kN}, 1);
        const auto p = eece_init(s, micro_dims(kC), micro_labels());
        randomize(s, {"eece.emo.prototypes", "eece.emo.alpha", "eece.gate.b"});
        const auto rules = NegationRules::defaults();
        out.push_back(check("emotion fusion", s, seed, eps, [&](auto& rng) {
            const auto y = mul(emotion_project(h, p.space), emotion_compatibility(e, p.space));
            const auto f = fuse_residual(h, negation_modulate(y, kTokens, rules), alpha, p.space, true);
            return add(project(f.h_tilde, rng), project(f.c_tilde, rng));
        }));
    }
    {
        ParameterStore s(seed);
        auto v = s.add_uniform("v", {kN, kC}, 1);
        auto e = s.add_uniform("e", {kN, kD}, 1);
        const auto p = eece_init(s, micro_dims(kC), micro_labels());
        randomize(s, {"eece.emo.prototypes", "eece.emo.alpha", "eece.gate.b"});
        const auto rules = NegationRules::defaults();
        out.push_back(check("eece", s, seed, eps, [&](auto& rng) {
            const auto o = eece_forward(v, e, kTokens, p, rules, true);
            return add(project(o.fusion.h_tilde, rng), project(o.fusion.c_tilde, rng));
        }));
    }
    for (auto mode : {Fusion::attention_stack, Fusion::summation}) {
        ParameterStore s(seed);
        auto v = s.add_uniform("v", {kC}, 1);
        auto h = s.add_uniform("h", {2 * kH}, 1);
        FusionParams p;
        p.proj_v_w = s.add_uniform("fv.w", {kH, kC}, kC);
        p.proj_v_b = s.add_uniform("fv.b", {kH}, kC);
        p.proj_h_w = s.add_uniform("fh.w", {kH, 2 * kH}, 2 * kH);
        p.proj_h_b = s.add_uniform("fh.b", {kH}, 2 * kH);
        p.score_w = s.add_uniform("fs.w", {1, kH}, kH);
        p.score_b = s.add_uniform("fs.b", {1}, kH);
        out.push_back(check("fusion " + to_string(mode), s, seed, eps,
                            [&](auto& rng) { return project(fuse_streams(v, h, mode, p).out, rng); }));
    }
    {
        ParameterStore s(seed);
        auto x = s.add_uniform("x", {2 * kH}, 1);
        auto w = s.add_uniform("w", {2, 2 * kH}, 2 * kH);
        auto b = s.add_uniform("b", {2}, 2 * kH);
        out.push_back(check("head", s, seed, eps, [&](auto&) { return loss(predict_head(x, w, b), 0); }));
    }

    const auto base = micro_config();
    out.push_back(model_case("micro model sequential", base, seed, eps));
    auto stack = base;
    stack.fusion = Fusion::attention_stack;
    out.push_back(model_case("micro model attention_stack", stack, seed, eps));
    auto summation = base;
    summation.fusion = Fusion::summation;
    out.push_back(model_case("micro model summation", summation, seed, eps));
    auto conv = base;
    conv.local_encoder = LocalEncoder::conv;
    out.push_back(model_case("micro model conv", conv, seed, eps));
    auto context = base;
    context.head_input = HeadInput::context;
    out.push_back(model_case("micro model context head", context, seed, eps));
    return out;
}

} // namespace mrfe
