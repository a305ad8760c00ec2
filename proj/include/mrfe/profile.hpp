#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/corpus.hpp"
#include "mrfe/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

// Multiply-accumulate = 2 FLOPs; elementwise work is not counted.
inline std::uint64_t matmul_flops(std::uint64_t m, std::uint64_t k, std::uint64_t p) { return 2 * m * k * p; }
inline std::uint64_t depthwise_flops(std::uint64_t n, std::uint64_t d, std::uint64_t k) { return 2 * n * d * k; }
// One direction over n steps.
inline std::uint64_t lstm_flops(std::uint64_t n, std::uint64_t in, std::uint64_t h) {
    return n * 2 * 4 * h * (in + h);
}

struct FlopTerm {
    std::string name;
    std::uint64_t flops = 0;
};

// Forward-pass FLOPs of `cfg` on a sequence of n tokens, per layer.
std::vector<FlopTerm> forward_flops(const ModelConfig& cfg, std::size_t n, std::size_t emotions);
std::uint64_t total_flops(const std::vector<FlopTerm>& terms);

struct ProfileReport {
    std::size_t parameters = 0;
    double flops = 0;            // mean per sample over the profiled inputs
    double latency_mean_ms = 0;
    double latency_std_ms = 0;   // sample standard deviation
    std::size_t repetitions = 0;
};

/// Times `repetitions` single-sample eval forwards (cycling through the texts)
/// after 3 untimed warmups, on the calling thread.
ProfileReport profile(const Model& model, const LabeledCorpus& samples, std::size_t repetitions);

} // namespace mrfe
