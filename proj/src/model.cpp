#include "mrfe/model.hpp"

#include "mrfe/config.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/ops.hpp"

#include <cmath>
#include <fstream>

namespace mrfe::inline MRFE_PRECISION {

std::string to_string(Variant v) {
    switch (v) {
    case Variant::cisea_sade: return "cisea_sade";
    case Variant::cisea_eece: return "cisea_eece";
    case Variant::ci_mrfe: return "ci_mrfe";
    case Variant::cisea_mrfe: return "cisea_mrfe";
    }
    return "?";
}

std::string to_string(Fusion f) {
    switch (f) {
    case Fusion::sequential: return "sequential";
    case Fusion::attention_stack: return "attention_stack";
    case Fusion::summation: return "summation";
    }
    return "?";
}

std::string to_string(LocalEncoder e) { return e == LocalEncoder::sade ? "sade" : "conv"; }
std::string to_string(HeadInput h) { return h == HeadInput::max_pool ? "max_pool" : "context"; }

Variant parse_variant(const std::string& s) {
    for (auto v : {Variant::cisea_sade, Variant::cisea_eece, Variant::ci_mrfe, Variant::cisea_mrfe}) {
        if (to_string(v) == s) return v;
    }
    throw ConfigError("unknown variant '" + s + "' (cisea_sade, cisea_eece, ci_mrfe, cisea_mrfe)");
}

Fusion parse_fusion(const std::string& s) {
    for (auto f : {Fusion::sequential, Fusion::attention_stack, Fusion::summation}) {
        if (to_string(f) == s) return f;
    }
    throw ConfigError("unknown fusion '" + s + "' (sequential, attention_stack, summation)");
}

LocalEncoder parse_local_encoder(const std::string& s) {
    if (s == "sade") return LocalEncoder::sade;
    if (s == "conv") return LocalEncoder::conv;
    throw ConfigError("unknown local encoder '" + s + "' (sade, conv)");
}

HeadInput parse_head_input(const std::string& s) {
    if (s == "max_pool") return HeadInput::max_pool;
    if (s == "context") return HeadInput::context;
    throw ConfigError("unknown head input '" + s + "' (max_pool, context)");
}

std::size_t ModelConfig::eece_input_dim() const {
    return has_local() && fusion == Fusion::sequential ? channels : embed_dim;
}

std::size_t ModelConfig::head_dim() const {
    if (!has_eece()) return channels;
    if (has_local() && fusion != Fusion::sequential) return effective_fusion_dim();
    return 2 * hidden;
}

void ModelConfig::validate() const {
    if (embed_dim == 0 || channels == 0 || hidden == 0 || attention_dim == 0) {
        throw ConfigError("model widths must be positive");
    }
    if (classes < 2) throw ConfigError("need at least 2 classes, got " + std::to_string(classes));
    if (max_len < 3) throw ConfigError("max_len must be at least 3, got " + std::to_string(max_len));
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (negation_window < 1) throw ConfigError("negation_window must be at least 1");
    if (!(hedge_lambda > 0.0 && hedge_lambda < 1.0)) throw ConfigError("hedge_lambda must lie in (0, 1)");
    if (variant == Variant::ci_mrfe && use_sea) throw ConfigError("variant ci_mrfe runs without augmentation");
    if (fusion != Fusion::sequential && !(has_local() && has_eece())) {
        throw ConfigError("fusion " + to_string(fusion) + " needs both encoders; variant " + to_string(variant) +
                          " has one");
    }
    if (!has_local() && local_encoder != LocalEncoder::sade) {
        throw ConfigError("variant " + to_string(variant) + " has no local encoder to replace");
    }
    if (head_input == HeadInput::context && !has_eece()) {
        throw ConfigError("head_input context needs the emotion encoder");
    }
    if (has_local() && local_encoder == LocalEncoder::sade) {
        SadeConfig s;
        s.kernels = kernels;
        s.d = embed_dim;
        s.c = channels;
        s.validate();
    }
}

const std::vector<std::string>& ModelConfig::keys() {
    static const std::vector<std::string> k = {
        "variant", "use_ci", "use_sea", "kernels", "fusion", "local_encoder", "head_input", "embed_dim",
        "channels", "hidden", "attention_dim", "fusion_dim", "classes", "max_len", "dropout", "gate_on",
        "negation_window", "hedge_lambda", "template_id", "domain", "contextual",
    };
    return k;
}

std::map<std::string, std::string> ModelConfig::to_kv() const {
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    return {
        {"variant", to_string(variant)},
        {"use_ci", b(use_ci)},
        {"use_sea", b(use_sea)},
        {"kernels", kernel_list_str(kernels)},
        {"fusion", to_string(fusion)},
        {"local_encoder", to_string(local_encoder)},
        {"head_input", to_string(head_input)},
        {"embed_dim", std::to_string(embed_dim)},
        {"channels", std::to_string(channels)},
        {"hidden", std::to_string(hidden)},
        {"attention_dim", std::to_string(attention_dim)},
        {"fusion_dim", std::to_string(fusion_dim)},
        {"classes", std::to_string(classes)},
        {"max_len", std::to_string(max_len)},
        {"dropout", format_double(dropout)},
        {"gate_on", b(gate_on)},
        {"negation_window", std::to_string(negation_window)},
        {"hedge_lambda", format_double(hedge_lambda)},
        {"template_id", template_id},
        {"domain", domain},
        {"contextual", b(contextual)},
    };
}

bool ModelConfig::apply(const std::string& key, const std::string& value) {
    if (key == "variant") {
        variant = parse_variant(value);
        use_sea = variant != Variant::ci_mrfe;
    } else if (key == "use_ci") use_ci = parse_bool(key, value);
    else if (key == "use_sea") use_sea = parse_bool(key, value);
    else if (key == "kernels") kernels = parse_kernel_list(value);
    else if (key == "fusion") fusion = parse_fusion(value);
    else if (key == "local_encoder") local_encoder = parse_local_encoder(value);
    else if (key == "head_input") head_input = parse_head_input(value);
    else if (key == "embed_dim") embed_dim = parse_size(key, value);
    else if (key == "channels") channels = parse_size(key, value);
    else if (key == "hidden") hidden = parse_size(key, value);
    else if (key == "attention_dim") attention_dim = parse_size(key, value);
    else if (key == "fusion_dim") fusion_dim = parse_size(key, value);
    else if (key == "classes") classes = parse_size(key, value);
    else if (key == "max_len") max_len = parse_size(key, value);
    else if (key == "dropout") dropout = parse_double(key, value);
    else if (key == "gate_on") gate_on = parse_bool(key, value);
    else if (key == "negation_window") negation_window = parse_size(key, value);
    else if (key == "hedge_lambda") hedge_lambda = parse_double(key, value);
    else if (key == "template_id") template_id = value;
    else if (key == "domain") domain = value;
    else if (key == "contextual") contextual = parse_bool(key, value);
    else return false;
    return true;
}

std::size_t model_param_count(const ModelConfig& cfg, std::size_t vocab_size, std::size_t emotions) {
    cfg.validate();
    const std::size_t d = cfg.embed_dim, c = cfg.channels, h = cfg.hidden, h2 = 2 * h;
    std::size_t n = cfg.contextual ? 0 : vocab_size * d;
    if (cfg.has_local()) {
        if (cfg.local_encoder == LocalEncoder::sade) {
            SadeConfig s;
            s.kernels = cfg.kernels;
            s.d = d;
            s.c = c;
            n += sade_param_count(s);
        } else {
            n += c * d * 3 + c;
        }
    }
    if (cfg.has_eece()) {
        const std::size_t in = cfg.eece_input_dim(), da = cfg.attention_dim;
        n += 2 * (4 * h * in + 4 * h * h + 4 * h);
        n += da * h2 + da + da;
        n += emotions * h2 + emotions + emotions * d + emotions + h2 + 1;
    }
    if (cfg.has_local() && cfg.has_eece() && cfg.fusion != Fusion::sequential) {
        const std::size_t f = cfg.effective_fusion_dim();
        n += f * c + f + f * h2 + f + f + 1;
    }
    return n + cfg.classes * cfg.head_dim() + cfg.classes;
}

Prediction predict_head(const Tensor& features, const Tensor& w_o, const Tensor& b_o) {
    Prediction p;
    p.logits = linear(features, w_o, b_o);
    p.probs = softmax_rows(p.logits);
    const auto& v = p.probs.data();
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[p.label]) p.label = i;
    }
    return p;
}

Tensor loss(const Prediction& pred, std::size_t label) { return softmax_cross_entropy(pred.logits, label); }

StreamFusion fuse_streams(const Tensor& v_pooled, const Tensor& h_pooled, Fusion mode, const FusionParams& p) {
    if (mode == Fusion::sequential) throw ConfigError("fuse_streams: sequential mode has no stream fusion");
    const auto pv = linear(v_pooled, p.proj_v_w, p.proj_v_b);
    const auto ph = linear(h_pooled, p.proj_h_w, p.proj_h_b);
    const Tensor both[2] = {pv, ph};
    StreamFusion out;
    if (mode == Fusion::summation) {
        out.out = mean_of(both);
        return out;
    }
    const auto stacked = stack_rows(both);
    const auto scores = reshape(linear(stacked, p.score_w, p.score_b), {2});
    const auto weights = softmax_rows(scores);
    out.out = reshape(matmul(reshape(weights, {1, 2}), stacked), {pv.numel()});
    out.weights = weights;
    return out;
}

namespace {

InstructionTemplate resolve_template(const TemplateRegistry& reg, const ModelConfig& cfg) {
    if (!cfg.template_id.empty()) return reg.by_id(cfg.template_id);
    const auto matches = reg.by_domain(cfg.domain);
    if (!cfg.domain.empty() && !matches.empty()) return *matches.front();
    return reg.contains("plain") ? reg.by_id("plain") : InstructionTemplate{};
}

std::vector<std::string> labels_of(const EmotionLexicon& lex) {
    std::vector<std::string> out;
    for (const auto& [name, _] : lex.emotions) out.push_back(name);
    return out;
}

NegationRules rules_of(const ModelConfig& cfg, const EmotionLexicon& lex) {
    auto r = NegationRules::defaults();
    if (lex.negation_cues) r.negation_cues = *lex.negation_cues;
    if (lex.hedge_cues) r.hedge_cues = *lex.hedge_cues;
    r.window = cfg.negation_window;
    r.lambda = cfg.hedge_lambda;
    return r;
}

} // namespace

Model::Model(ModelConfig cfg, Vocab vocab, std::uint64_t seed, const EmotionLexicon& lexicon, TemplateRegistry templates)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), store_(seed), emotion_labels_(labels_of(lexicon)),
      rules_(rules_of(cfg_, lexicon)), templates_(std::move(templates)) {
    cfg_.validate();
    if (cfg_.has_eece() && emotion_labels_.empty()) throw ConfigError("emotion lexicon lists no emotions");
    template_ = resolve_template(templates_, cfg_);

    const std::size_t d = cfg_.embed_dim, c = cfg_.channels, h2 = 2 * cfg_.hidden;
    if (!cfg_.contextual) store_.add_uniform("embed.table", {vocab_.size(), d}, d);
    if (cfg_.has_local()) {
        if (cfg_.local_encoder == LocalEncoder::sade) {
            SadeConfig s;
            s.kernels = cfg_.kernels;
            s.d = d;
            s.c = c;
            sade_init(store_, s);
        } else {
            store_.add_uniform("conv.w", {c, d, 3}, d * 3);
            store_.add_uniform("conv.b", {c}, d * 3);
        }
    }
    if (cfg_.has_eece()) {
        EeceDims dims;
        dims.in = cfg_.eece_input_dim();
        dims.embed = d;
        dims.hidden = cfg_.hidden;
        dims.attention = cfg_.attention_dim;
        dims.emotions = emotion_labels_.size();
        eece_init(store_, dims, emotion_labels_);
    }
    if (cfg_.has_local() && cfg_.has_eece() && cfg_.fusion != Fusion::sequential) {
        const std::size_t f = cfg_.effective_fusion_dim();
        store_.add_uniform("fusion.v.w", {f, c}, c);
        store_.add_uniform("fusion.v.b", {f}, c);
        store_.add_uniform("fusion.h.w", {f, h2}, h2);
        store_.add_uniform("fusion.h.b", {f}, h2);
        store_.add_uniform("fusion.score.w", {1, f}, f);
        store_.add_zeros("fusion.score.b", {1});
    }
    const std::size_t hd = cfg_.head_dim();
    store_.add_uniform("head.w", {cfg_.classes, hd}, hd);
    store_.add_zeros("head.b", {cfg_.classes});
    bind();
    if (cfg_.has_eece()) init_prototypes(lexicon);
}

Model::Model(ModelConfig cfg, Vocab vocab, ParameterStore store, std::vector<std::string> emotion_labels,
             NegationRules rules, TemplateRegistry templates)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), store_(std::move(store)),
      emotion_labels_(std::move(emotion_labels)), rules_(std::move(rules)), templates_(std::move(templates)) {
    cfg_.validate();
    template_ = resolve_template(templates_, cfg_);
    bind();
}

void Model::bind() {
    if (!cfg_.contextual) table_ = store_.get("embed.table");
    if (cfg_.has_local()) {
        if (cfg_.local_encoder == LocalEncoder::sade) {
            SadeConfig s;
            s.kernels = cfg_.kernels;
            s.d = cfg_.embed_dim;
            s.c = cfg_.channels;
            sade_ = sade_bind(store_, s);
        } else {
            conv_w_ = store_.get("conv.w");
            conv_b_ = store_.get("conv.b");
        }
    }
    if (cfg_.has_eece()) eece_ = eece_bind(store_, emotion_labels_);
    if (store_.contains("fusion.v.w")) {
        fusion_ = FusionParams{store_.get("fusion.v.w"), store_.get("fusion.v.b"),     store_.get("fusion.h.w"),
                               store_.get("fusion.h.b"), store_.get("fusion.score.w"), store_.get("fusion.score.b")};
    }
    w_o_ = store_.get("head.w");
    b_o_ = store_.get("head.b");
}

// Prototype of an emotion: mean table row of its seed words found in the
// vocabulary, or a fresh uniform vector when none are.
void Model::init_prototypes(const EmotionLexicon& lexicon) {
    auto protos = store_.get("eece.emo.prototypes");
    const std::size_t d = cfg_.embed_dim;
    auto out = protos.mutable_data();
    for (std::size_t e = 0; e < lexicon.emotions.size(); ++e) {
        std::vector<double> acc(d, 0.0);
        std::size_t found = 0;
        if (!cfg_.contextual) {
            for (const auto& w : lexicon.emotions[e].second) {
                if (!vocab_.contains(w)) continue;
                const auto id = vocab_.id_of(w);
                for (std::size_t j = 0; j < d; ++j) acc[j] += table_.at(id, j);
                ++found;
            }
        }
        if (found == 0) {
            Tensor fresh = Tensor::zeros({d});
            fill_uniform(fresh, 1.0 / std::sqrt(static_cast<double>(d)), store_.rng());
            for (std::size_t j = 0; j < d; ++j) out[e * d + j] = fresh.data()[j];
        } else {
            for (std::size_t j = 0; j < d; ++j) out[e * d + j] = static_cast<Scalar>(acc[j] / static_cast<double>(found));
        }
    }
}

std::string prepare_text(const ModelConfig& cfg, const TemplateRegistry& templates, const std::string& text) {
    return cfg.use_ci ? apply_instruction(text, std::nullopt, resolve_template(templates, cfg)) : text;
}

std::string Model::prepare(const std::string& text) const {
    return cfg_.use_ci ? apply_instruction(text, std::nullopt, template_) : text;
}

TokenSequence Model::encode(const std::string& text) const { return mrfe::encode(prepare(text), vocab_, cfg_.max_len); }

ForwardTrace Model::forward(const TokenSequence& seq, bool train, std::mt19937_64* rng) const {
    if (cfg_.contextual) throw ConfigError("model reads contextual embeddings; use forward_embedded");
    return forward_embedded(gather_rows(table_, seq.ids), seq.tokens, train, rng);
}

ForwardTrace Model::forward_embedded(const Tensor& e, const std::vector<std::string>& tokens, bool train,
                                     std::mt19937_64* rng) const {
    if (e.rank() != 2 || e.dim(1) != cfg_.embed_dim || e.dim(0) == 0) {
        throw DimensionError("model expects [n×" + std::to_string(cfg_.embed_dim) + "] embeddings, got " +
                             shape_str(e.shape()));
    }
    if (tokens.size() != e.dim(0)) {
        throw DimensionError(std::to_string(tokens.size()) + " tokens for " + std::to_string(e.dim(0)) + " rows");
    }
    const bool drop = train && cfg_.dropout > 0.0;
    if (drop && rng == nullptr) throw ConfigError("training forward with dropout needs a generator");

    ForwardTrace t;
    t.e = drop ? dropout(e, cfg_.dropout, *rng) : e;
    if (cfg_.has_local()) {
        if (sade_) {
            t.sade = sade_forward(t.e, *sade_);
            t.local = t.sade->v;
        } else {
            t.local = conv1d_full(t.e, conv_w_, conv_b_);
        }
    }
    Tensor pooled;
    if (!cfg_.has_eece()) {
        pooled = max_over_time(t.local);
    } else {
        const bool sequential = cfg_.has_local() && cfg_.fusion == Fusion::sequential;
        const Tensor& eece_in = sequential ? t.local : t.e;
        t.eece = eece_forward(eece_in, t.e, tokens, *eece_, rules_, cfg_.gate_on);
        const Tensor h_pooled = cfg_.head_input == HeadInput::max_pool ? max_over_time(t.eece->fusion.h_tilde)
                                                                        : t.eece->fusion.c_tilde;
        if (cfg_.has_local() && !sequential) {
            t.fusion = fuse_streams(max_over_time(t.local), h_pooled, cfg_.fusion, *fusion_);
            pooled = t.fusion->out;
        } else {
            pooled = h_pooled;
        }
    }
    t.features = drop ? dropout(pooled, cfg_.dropout, *rng) : pooled;
    t.prediction = predict_head(t.features, w_o_, b_o_);
    return t;
}

Prediction Model::predict(const std::string& text) const {
    NoGradGuard guard;
    return forward(encode(text), false).prediction;
}

void Model::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "model.cfg");
        if (!out) throw InputError("cannot write " + (dir / "model.cfg").string());
        write_kv(out, cfg_.to_kv());
    }
    vocab_.save(dir / "vocab.txt");
    {
        std::ofstream out(dir / "emotions.txt");
        for (const auto& name : emotion_labels_) out << name << ": " << name << '\n';
        out << "negation:";
        for (const auto& c : rules_.negation_cues) out << ' ' << c;
        out << "\nhedge:";
        for (const auto& c : rules_.hedge_cues) out << ' ' << c;
        out << '\n';
    }
    {
        std::ofstream out(dir / "templates.txt");
        write_templates(out, templates_.all());
    }
    save_checkpoint(dir / "params.ckpt", store_);
}

Model Model::load(const std::filesystem::path& dir) {
    ModelConfig cfg;
    for (const auto& e : load_kv(dir / "model.cfg")) {
        if (!cfg.apply(e.key, e.value)) {
            throw ConfigError((dir / "model.cfg").string() + " line " + std::to_string(e.line) + ": unknown key '" +
                              e.key + "'");
        }
    }
    auto vocab = Vocab::load(dir / "vocab.txt");
    const auto lex = load_emotion_lexicon(dir / "emotions.txt");
    TemplateRegistry templates;
    for (auto& t : load_templates(dir / "templates.txt")) templates.add(std::move(t));
    auto store = load_checkpoint(dir / "params.ckpt");
    auto rules = rules_of(cfg, lex);
    return Model(std::move(cfg), std::move(vocab), std::move(store), labels_of(lex), std::move(rules),
                 std::move(templates));
}

} // namespace mrfe
