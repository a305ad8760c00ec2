#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/parameter_store.hpp"
#include "mrfe/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

struct LstmDirection {
    Tensor w_ih;   // [4h×in]
    Tensor w_hh;   // [4h×h]
    Tensor bias;   // [4h]
};

struct BiLstmParams {
    LstmDirection forward;
    LstmDirection backward;
    std::size_t hidden() const { return forward.w_hh.dim(1); }
};

struct AttentionParams {
    Tensor w_a;   // [d_a×2h]
    Tensor b_a;   // [d_a]
    Tensor v_a;   // [d_a]
};

struct EmotionSpace {
    std::vector<std::string> labels;
    Tensor w_e;            // [|E|×2h]
    Tensor b_e;            // [|E|]
    Tensor prototypes;     // [|E|×d]
    Tensor alpha_logits;   // [|E|]
    Tensor w_g;            // [1×2h]
    Tensor b_g;            // [1]
};

struct NegationRules {
    std::vector<std::string> negation_cues;
    std::vector<std::string> hedge_cues;   // multiword cues are written with '-', e.g. "a-bit"
    std::size_t window = 3;
    double lambda = 0.5;

    static NegationRules defaults();
    void validate() const;
};

struct EeceDims {
    std::size_t in = 32;         // BiLSTM input width
    std::size_t embed = 32;      // token embedding width d
    std::size_t hidden = 16;     // h per direction
    std::size_t attention = 16;  // d_a
    std::size_t emotions = 8;    // |E|
};

struct EeceParams {
    BiLstmParams lstm;
    AttentionParams attention;
    EmotionSpace space;
};

// Registers the BiLSTM, attention and emotion-space tensors under "<prefix>.".
// Prototypes start as zeros and are set by the caller.
EeceParams eece_init(ParameterStore& store, const EeceDims& dims, std::vector<std::string> emotion_labels,
                     const std::string& prefix = "eece");
EeceParams eece_bind(const ParameterStore& store, std::vector<std::string> emotion_labels,
                     const std::string& prefix = "eece");

// [n×in] → [n×2h]: forward state at t followed by backward state at t.
Tensor bilstm_forward(const Tensor& v, const BiLstmParams& params);

struct AttentionResult {
    Tensor alpha;     // [n]
    Tensor context;   // [2h]
};
AttentionResult attention_pool(const Tensor& h, const AttentionParams& params);

// Row-wise softmax(W_e h_t + b_e); accepts one state [2h] or all states [n×2h].
Tensor emotion_project(const Tensor& h, const EmotionSpace& space);

// Cosine of each token embedding with each prototype: [n×d] → [n×|E|].
Tensor emotion_compatibility(const Tensor& e, const EmotionSpace& space);

// −1 when a negation cue lies within the w tokens before t, λ when only a hedge
// cue does, 1 otherwise.
std::vector<Scalar> modulation_factors(const std::vector<std::string>& tokens, const NegationRules& rules);
Tensor negation_modulate(const Tensor& y, const std::vector<std::string>& tokens, const NegationRules& rules);

struct FusionResult {
    Tensor alpha_e;       // [|E|]
    Tensor signal;        // [n], the (gated) emotion term added to every coordinate of h_t
    Tensor h_tilde;       // [n×2h]
    Tensor c_tilde;       // [2h]
};
FusionResult fuse_residual(const Tensor& h, const Tensor& y_mod, const Tensor& alpha, const EmotionSpace& space,
                           bool gate_on);

struct EeceOutput {
    Tensor h;
    AttentionResult attention;
    Tensor emotions;   // e_t per row, diagnostic only
    Tensor y;
    Tensor y_mod;
    FusionResult fusion;
};

EeceOutput eece_forward(const Tensor& v, const Tensor& e, const std::vector<std::string>& tokens,
                        const EeceParams& params, const NegationRules& rules, bool gate_on);

/// "name: word word …" lines. "negation" and "hedge" name the cue lists; every
/// other name is an emotion. '#' starts a comment line.
struct EmotionLexicon {
    std::vector<std::pair<std::string, std::vector<std::string>>> emotions;
    std::optional<std::vector<std::string>> negation_cues;
    std::optional<std::vector<std::string>> hedge_cues;

    static EmotionLexicon builtin();
};
EmotionLexicon parse_emotion_lexicon(std::istream& in);
EmotionLexicon load_emotion_lexicon(const std::filesystem::path& path);

} // namespace mrfe
