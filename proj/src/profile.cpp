#include "mrfe/profile.hpp"

#include "mrfe/errors.hpp"

#include <chrono>
#include <cmath>

namespace mrfe::inline MRFE_PRECISION {

std::vector<FlopTerm> forward_flops(const ModelConfig& cfg, std::size_t n, std::size_t emotions) {
    cfg.validate();
    const std::uint64_t d = cfg.embed_dim, c = cfg.channels, h2 = 2 * cfg.hidden, E = emotions, N = n;
    std::vector<FlopTerm> t;
    if (cfg.has_local()) {
        if (cfg.local_encoder == LocalEncoder::sade) {
            for (auto k : cfg.kernels) t.push_back({"sade.dw" + std::to_string(k), depthwise_flops(N, d, k)});
            t.push_back({"sade.pw", matmul_flops(N, d, c)});
        } else {
            t.push_back({"conv", matmul_flops(N, d * 3, c)});
        }
    }
    if (cfg.has_eece()) {
        const std::uint64_t in = cfg.eece_input_dim(), h = cfg.hidden, da = cfg.attention_dim;
        t.push_back({"eece.lstm", 2 * lstm_flops(N, in, h)});
        t.push_back({"eece.attention", matmul_flops(N, h2, da) + matmul_flops(N, da, 1) + matmul_flops(1, N, h2)});
        t.push_back({"eece.emotion_project", matmul_flops(N, h2, E)});
        t.push_back({"eece.compatibility", matmul_flops(N, d, E)});
        std::uint64_t fuse = matmul_flops(N, E, 1) + matmul_flops(1, N, h2);
        if (cfg.gate_on) fuse += matmul_flops(N, h2, 1);
        t.push_back({"eece.fusion", fuse});
    }
    if (cfg.has_local() && cfg.has_eece() && cfg.fusion != Fusion::sequential) {
        const std::uint64_t f = cfg.effective_fusion_dim();
        std::uint64_t fl = matmul_flops(1, c, f) + matmul_flops(1, h2, f);
        if (cfg.fusion == Fusion::attention_stack) fl += matmul_flops(2, f, 1) + matmul_flops(1, 2, f);
        t.push_back({"fusion", fl});
    }
    t.push_back({"head", matmul_flops(1, cfg.head_dim(), cfg.classes)});
    return t;
}

std::uint64_t total_flops(const std::vector<FlopTerm>& terms) {
    std::uint64_t s = 0;
    for (const auto& t : terms) s += t.flops;
    return s;
}

ProfileReport profile(const Model& model, const LabeledCorpus& samples, std::size_t repetitions) {
    if (samples.size() == 0) throw InputError("profile needs at least one sample");
    if (repetitions == 0) throw ConfigError("profile needs at least one repetition");
    NoGradGuard guard;
    std::vector<TokenSequence> seqs;
    double flops = 0;
    for (const auto& s : samples.samples) {
        seqs.push_back(model.encode(s.text));
        flops += static_cast<double>(
            total_flops(forward_flops(model.config(), seqs.back().size(), model.emotion_labels().size())));
    }
    ProfileReport r;
    r.parameters = model.params().parameter_count();
    r.flops = flops / static_cast<double>(seqs.size());
    r.repetitions = repetitions;
    for (std::size_t w = 0; w < 3; ++w) model.forward(seqs[w % seqs.size()], false);
    std::vector<double> ms(repetitions);
    for (std::size_t i = 0; i < repetitions; ++i) {
        const auto& seq = seqs[i % seqs.size()];
        const auto t0 = std::chrono::steady_clock::now();
        const auto out = model.forward(seq, false);
        const auto t1 = std::chrono::steady_clock::now();
        ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    double mean = 0;
    for (double v : ms) mean += v;
    mean /= static_cast<double>(repetitions);
    double ss = 0;
    for (double v : ms) ss += (v - mean) * (v - mean);
    r.latency_mean_ms = mean;
    r.latency_std_ms = repetitions > 1 ? std::sqrt(ss / static_cast<double>(repetitions - 1)) : 0.0;
    return r;
}

} // namespace mrfe
