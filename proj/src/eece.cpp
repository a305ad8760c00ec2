#include "mrfe/eece.hpp"

#include "mrfe/errors.hpp"
#include "mrfe/lexicon.hpp"
#include "mrfe/ops.hpp"
#include "mrfe/text_util.hpp"
#include "mrfe/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mrfe::inline MRFE_PRECISION {

NegationRules NegationRules::defaults() {
    NegationRules r;
    r.negation_cues = lexicon::negation_cues();
    r.hedge_cues = lexicon::hedge_cues();
    return r;
}

void NegationRules::validate() const {
    if (window < 1) throw ConfigError("negation window must be at least 1");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("attenuation must lie in (0, 1), got " + std::to_string(lambda));
}

namespace {

LstmDirection init_direction(ParameterStore& store, const std::string& name, std::size_t in, std::size_t h) {
    return {store.add_uniform(name + ".w_ih", {4 * h, in}, h), store.add_uniform(name + ".w_hh", {4 * h, h}, h),
            store.add_uniform(name + ".b", {4 * h}, h)};
}

LstmDirection bind_direction(const ParameterStore& store, const std::string& name) {
    return {store.get(name + ".w_ih"), store.get(name + ".w_hh"), store.get(name + ".b")};
}

} // namespace

EeceParams eece_init(ParameterStore& store, const EeceDims& dims, std::vector<std::string> emotion_labels,
                     const std::string& prefix) {
    if (dims.in == 0 || dims.embed == 0 || dims.hidden == 0 || dims.attention == 0 || dims.emotions == 0) {
        throw ConfigError("EECE widths must be positive");
    }
    if (emotion_labels.size() != dims.emotions) {
        throw ConfigError("EECE expects " + std::to_string(dims.emotions) + " emotion labels, got " +
                          std::to_string(emotion_labels.size()));
    }
    const std::size_t h = dims.hidden, h2 = 2 * dims.hidden;
    EeceParams p;
    p.lstm.forward = init_direction(store, prefix + ".lstm.fwd", dims.in, h);
    p.lstm.backward = init_direction(store, prefix + ".lstm.bwd", dims.in, h);
    p.attention.w_a = store.add_uniform(prefix + ".att.w", {dims.attention, h2}, h2);
    p.attention.b_a = store.add_uniform(prefix + ".att.b", {dims.attention}, h2);
    p.attention.v_a = store.add_uniform(prefix + ".att.v", {dims.attention}, dims.attention);
    p.space.labels = std::move(emotion_labels);
    p.space.w_e = store.add_uniform(prefix + ".emo.w", {dims.emotions, h2}, h2);
    p.space.b_e = store.add_uniform(prefix + ".emo.b", {dims.emotions}, h2);
    p.space.prototypes = store.add_zeros(prefix + ".emo.prototypes", {dims.emotions, dims.embed});
    p.space.alpha_logits = store.add_zeros(prefix + ".emo.alpha", {dims.emotions});
    p.space.w_g = store.add_uniform(prefix + ".gate.w", {1, h2}, h2);
    p.space.b_g = store.add_zeros(prefix + ".gate.b", {1});
    return p;
}

EeceParams eece_bind(const ParameterStore& store, std::vector<std::string> emotion_labels, const std::string& prefix) {
    EeceParams p;
    p.lstm.forward = bind_direction(store, prefix + ".lstm.fwd");
    p.lstm.backward = bind_direction(store, prefix + ".lstm.bwd");
    p.attention = {store.get(prefix + ".att.w"), store.get(prefix + ".att.b"), store.get(prefix + ".att.v")};
    p.space.labels = std::move(emotion_labels);
    p.space.w_e = store.get(prefix + ".emo.w");
    p.space.b_e = store.get(prefix + ".emo.b");
    p.space.prototypes = store.get(prefix + ".emo.prototypes");
    p.space.alpha_logits = store.get(prefix + ".emo.alpha");
    p.space.w_g = store.get(prefix + ".gate.w");
    p.space.b_g = store.get(prefix + ".gate.b");
    return p;
}

Tensor bilstm_forward(const Tensor& v, const BiLstmParams& p) {
    if (v.rank() != 2 || v.dim(0) == 0) throw InputError("BiLSTM input must be a non-empty [n×in] matrix");
    const auto& f = p.forward;
    const auto& b = p.backward;
    return concat_cols(lstm_direction(v, f.w_ih, f.w_hh, f.bias, false),
                       lstm_direction(v, b.w_ih, b.w_hh, b.bias, true));
}

AttentionResult attention_pool(const Tensor& h, const AttentionParams& p) {
    if (h.rank() != 2 || h.dim(0) == 0) throw InputError("attention input must be a non-empty [n×2h] matrix");
    const std::size_t n = h.dim(0);
    const auto u = tanh(linear(h, p.w_a, p.b_a));
    const auto scores = linear(u, reshape(p.v_a, {1, p.v_a.numel()}));
    AttentionResult r;
    r.alpha = softmax_rows(reshape(scores, {n}));
    r.context = reshape(matmul(reshape(r.alpha, {1, n}), h), {h.dim(1)});
    return r;
}

Tensor emotion_project(const Tensor& h, const EmotionSpace& space) {
    return softmax_rows(linear(h, space.w_e, space.b_e));
}

Tensor emotion_compatibility(const Tensor& e, const EmotionSpace& space) { return cosine_rows(e, space.prototypes); }

namespace {

// True when the token sequence `cue` lies entirely inside tokens[lo, hi).
bool cue_within(const std::vector<std::string>& tokens, const std::vector<std::string>& cue, std::size_t lo,
                std::size_t hi) {
    if (cue.empty() || hi < lo + cue.size()) return false;
    for (std::size_t s = lo; s + cue.size() <= hi; ++s) {
        if (std::equal(cue.begin(), cue.end(), tokens.begin() + static_cast<long>(s))) return true;
    }
    return false;
}

// Multiword cues join their words with '-'.
std::vector<std::string> cue_tokens(std::string cue) {
    std::replace(cue.begin(), cue.end(), '-', ' ');
    return split_words(cue);
}

} // namespace

std::vector<Scalar> modulation_factors(const std::vector<std::string>& tokens, const NegationRules& rules) {
    rules.validate();
    std::vector<std::vector<std::string>> neg, hedge;
    for (const auto& c : rules.negation_cues) neg.push_back(cue_tokens(c));
    for (const auto& c : rules.hedge_cues) hedge.push_back(cue_tokens(c));
    std::vector<Scalar> factors(tokens.size(), Scalar(1));
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const std::size_t lo = t >= rules.window ? t - rules.window : 0;
        auto any = [&](const auto& cues) {
            return std::any_of(cues.begin(), cues.end(), [&](const auto& c) { return cue_within(tokens, c, lo, t); });
        };
        if (any(neg)) factors[t] = Scalar(-1);
        else if (any(hedge)) factors[t] = static_cast<Scalar>(rules.lambda);
    }
    return factors;
}

Tensor negation_modulate(const Tensor& y, const std::vector<std::string>& tokens, const NegationRules& rules) {
    if (y.rank() != 2 || y.dim(0) != tokens.size()) {
        throw DimensionError("negation_modulate: " + shape_str(y.shape()) + " scores for " +
                             std::to_string(tokens.size()) + " tokens");
    }
    const auto factors = modulation_factors(tokens, rules);
    return scale_rows(y, factors);
}

FusionResult fuse_residual(const Tensor& h, const Tensor& y_mod, const Tensor& alpha, const EmotionSpace& space,
                           bool gate_on) {
    const std::size_t n = h.dim(0);
    if (y_mod.rank() != 2 || y_mod.dim(0) != n || alpha.numel() != n) {
        throw DimensionError("fuse_residual: H " + shape_str(h.shape()) + ", Y " + shape_str(y_mod.shape()) +
                             ", alpha " + shape_str(alpha.shape()));
    }
    FusionResult r;
    r.alpha_e = softmax_rows(space.alpha_logits);
    auto s = matmul(y_mod, reshape(r.alpha_e, {r.alpha_e.numel(), 1}));
    if (gate_on) s = mul(sigmoid(linear(h, space.w_g, space.b_g)), s);
    r.signal = reshape(s, {n});
    r.h_tilde = add_column_broadcast(h, r.signal);
    r.c_tilde = reshape(matmul(reshape(alpha, {1, n}), r.h_tilde), {h.dim(1)});
    return r;
}

EeceOutput eece_forward(const Tensor& v, const Tensor& e, const std::vector<std::string>& tokens,
                        const EeceParams& params, const NegationRules& rules, bool gate_on) {
    if (v.dim(0) != e.dim(0) || e.dim(0) != tokens.size()) {
        throw DimensionError("eece_forward: features " + shape_str(v.shape()) + ", embeddings " +
                             shape_str(e.shape()) + ", " + std::to_string(tokens.size()) + " tokens");
    }
    EeceOutput out;
    out.h = bilstm_forward(v, params.lstm);
    out.attention = attention_pool(out.h, params.attention);
    out.emotions = emotion_project(out.h, params.space);
    out.y = emotion_compatibility(e, params.space);
    out.y_mod = negation_modulate(out.y, tokens, rules);
    out.fusion = fuse_residual(out.h, out.y_mod, out.attention.alpha, params.space, gate_on);
    return out;
}

EmotionLexicon EmotionLexicon::builtin() {
    EmotionLexicon lex;
    lex.emotions = lexicon::emotion_seeds();
    lex.negation_cues = lexicon::negation_cues();
    lex.hedge_cues = lexicon::hedge_cues();
    return lex;
}

EmotionLexicon parse_emotion_lexicon(std::istream& in) {
    EmotionLexicon lex;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto colon = t.find(':');
        if (colon == std::string::npos) {
            throw ParseError("emotion lexicon line " + std::to_string(line_no) + ": expected 'name: words'");
        }
        const auto name = to_lower(trim(std::string_view(t).substr(0, colon)));
        if (name.empty()) throw ParseError("emotion lexicon line " + std::to_string(line_no) + ": empty name");
        std::vector<std::string> words;
        std::istringstream ws(t.substr(colon + 1));
        for (std::string w; ws >> w;) words.push_back(to_lower(w));
        if (words.empty()) {
            throw ParseError("emotion lexicon line " + std::to_string(line_no) + ": '" + name + "' lists no words");
        }
        if (name == "negation") {
            lex.negation_cues = std::move(words);
        } else if (name == "hedge") {
            lex.hedge_cues = std::move(words);
        } else {
            for (const auto& [existing, _] : lex.emotions) {
                if (existing == name) {
                    throw ParseError("emotion lexicon line " + std::to_string(line_no) + ": duplicate emotion '" +
                                     name + "'");
                }
            }
            lex.emotions.emplace_back(name, std::move(words));
        }
    }
    return lex;
}

EmotionLexicon load_emotion_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open emotion lexicon " + path.string());
    return parse_emotion_lexicon(in);
}

} // namespace mrfe
