#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/eece.hpp"
#include "mrfe/instruction.hpp"
#include "mrfe/parameter_store.hpp"
#include "mrfe/sade.hpp"
#include "mrfe/tensor.hpp"
#include "mrfe/vocab.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

enum class Variant { cisea_sade, cisea_eece, ci_mrfe, cisea_mrfe };
enum class Fusion { sequential, attention_stack, summation };
enum class LocalEncoder { sade, conv };
enum class HeadInput { max_pool, context };

std::string to_string(Variant v);
std::string to_string(Fusion f);
std::string to_string(LocalEncoder e);
std::string to_string(HeadInput h);
Variant parse_variant(const std::string& s);
Fusion parse_fusion(const std::string& s);
LocalEncoder parse_local_encoder(const std::string& s);
HeadInput parse_head_input(const std::string& s);

struct ModelConfig {
    Variant variant = Variant::cisea_mrfe;
    bool use_ci = true;
    bool use_sea = true;
    std::vector<std::size_t> kernels{1, 3, 5, 7};
    Fusion fusion = Fusion::sequential;
    LocalEncoder local_encoder = LocalEncoder::sade;
    HeadInput head_input = HeadInput::max_pool;
    std::size_t embed_dim = 32;      // d
    std::size_t channels = 32;       // c
    std::size_t hidden = 16;         // h per direction
    std::size_t attention_dim = 16;  // d_a
    std::size_t fusion_dim = 0;      // f for the parallel fusion modes; 0 means 2h
    std::size_t classes = 2;
    std::size_t max_len = 64;
    double dropout = 0.1;
    bool gate_on = true;
    std::size_t negation_window = 3;
    double hedge_lambda = 0.5;
    std::string template_id;         // empty: the first built-in template of `domain`, else "plain"
    std::string domain;
    bool contextual = false;         // embeddings come from a contextual file instead of a table

    bool has_local() const { return variant != Variant::cisea_eece; }
    bool has_eece() const { return variant != Variant::cisea_sade; }
    std::size_t eece_input_dim() const;
    std::size_t head_dim() const;
    std::size_t effective_fusion_dim() const { return fusion_dim ? fusion_dim : 2 * hidden; }

    // Throws ConfigError on inconsistent flags or non-positive widths.
    void validate() const;

    // Flat key=value view; `apply` returns false for keys it does not own.
    // Setting variant also sets use_sea (off for ci_mrfe only).
    std::map<std::string, std::string> to_kv() const;
    bool apply(const std::string& key, const std::string& value);
    static const std::vector<std::string>& keys();

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// The text the model tokenizes: instruction-wrapped when CI is on, raw otherwise.
std::string prepare_text(const ModelConfig& cfg, const TemplateRegistry& templates, const std::string& text);

// Closed-form trainable parameter count for a configuration and vocabulary size.
std::size_t model_param_count(const ModelConfig& cfg, std::size_t vocab_size, std::size_t emotions);

struct Prediction {
    Tensor logits;   // [C]
    Tensor probs;    // [C]
    std::size_t label = 0;
};

// softmax(W_o·features + b_o) with the first maximal class as the label.
Prediction predict_head(const Tensor& features, const Tensor& w_o, const Tensor& b_o);

// Cross-entropy of the prediction against `label`, evaluated on the logits so
// the gradient is exactly softmax − onehot.
Tensor loss(const Prediction& pred, std::size_t label);

struct FusionParams {
    Tensor proj_v_w, proj_v_b;   // [f×c], [f]
    Tensor proj_h_w, proj_h_b;   // [f×2h], [f]
    Tensor score_w, score_b;     // [1×f], [1]
};

struct StreamFusion {
    Tensor out;                    // [f]
    std::optional<Tensor> weights; // [2], attention_stack only
};

// summation: mean of the two projections. attention_stack: softmax over the
// scalar scores of both projections, then their weighted sum.
// Throws ConfigError for Fusion::sequential.
StreamFusion fuse_streams(const Tensor& v_pooled, const Tensor& h_pooled, Fusion mode, const FusionParams& params);

struct ForwardTrace {
    Tensor e;
    std::optional<SadeOutput> sade;
    Tensor local;                    // V, from SADE or the plain convolution
    std::optional<EeceOutput> eece;
    std::optional<StreamFusion> fusion;
    Tensor features;
    Prediction prediction;
};

class Model {
public:
    Model(ModelConfig cfg, Vocab vocab, std::uint64_t seed,
          const EmotionLexicon& lexicon = EmotionLexicon::builtin(),
          TemplateRegistry templates = TemplateRegistry::builtin());

    const ModelConfig& config() const noexcept { return cfg_; }
    const Vocab& vocab() const noexcept { return vocab_; }
    ParameterStore& params() noexcept { return store_; }
    const ParameterStore& params() const noexcept { return store_; }
    const std::vector<std::string>& emotion_labels() const noexcept { return emotion_labels_; }
    const NegationRules& rules() const noexcept { return rules_; }

    // Instruction-wrapped text when CI is on, the raw text otherwise.
    std::string prepare(const std::string& text) const;
    TokenSequence encode(const std::string& text) const;

    // Table-backed forward over an encoded sequence. `rng` drives dropout and is
    // only used when `train` is true.
    ForwardTrace forward(const TokenSequence& seq, bool train, std::mt19937_64* rng = nullptr) const;
    // Forward over given embeddings (contextual mode, or tests). Token strings
    // drive negation handling and may be empty strings.
    ForwardTrace forward_embedded(const Tensor& e, const std::vector<std::string>& tokens, bool train,
                                  std::mt19937_64* rng = nullptr) const;

    Prediction predict(const std::string& text) const;

    // Directory with model.cfg, vocab.txt, emotions.txt and params.ckpt.
    void save(const std::filesystem::path& dir) const;
    static Model load(const std::filesystem::path& dir);

    // Replaces parameter values (names and shapes must match).
    void load_values(const ParameterStore& other) { store_.copy_values_from(other); }

private:
    Model(ModelConfig cfg, Vocab vocab, ParameterStore store, std::vector<std::string> emotion_labels,
          NegationRules rules, TemplateRegistry templates);
    void bind();
    void init_prototypes(const EmotionLexicon& lexicon);

    ModelConfig cfg_;
    Vocab vocab_;
    ParameterStore store_;
    std::vector<std::string> emotion_labels_;
    NegationRules rules_;
    TemplateRegistry templates_;
    InstructionTemplate template_;

    Tensor table_;
    std::optional<SadeParams> sade_;
    Tensor conv_w_, conv_b_;
    std::optional<EeceParams> eece_;
    std::optional<FusionParams> fusion_;
    Tensor w_o_, b_o_;
};

} // namespace mrfe
