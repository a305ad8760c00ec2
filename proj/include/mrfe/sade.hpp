#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/parameter_store.hpp"
#include "mrfe/tensor.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

struct SadeConfig {
    std::vector<std::size_t> kernels{1, 3, 5, 7};
    std::size_t d = 32;   // input width, also the depthwise group count
    std::size_t c = 32;   // pointwise output channels

    // Throws ConfigError unless kernels are non-empty, odd, ascending and unique
    // and both widths are positive.
    void validate() const;
    std::size_t window() const { return kernels.back(); }
};

// Parses "1,3,5,7" into a sorted kernel list; rejects even, zero or repeated sizes.
std::vector<std::size_t> parse_kernel_list(std::string_view text);
std::string kernel_list_str(const std::vector<std::size_t>& kernels);

// Σ_k d(k+1) + d·c + c.
std::size_t sade_param_count(const SadeConfig& cfg);

struct SadeBranch {
    Tensor weight;   // [d×k]
    Tensor bias;     // [d]
};

struct SadeParams {
    std::map<std::size_t, SadeBranch> branches;   // keyed and evaluated by ascending k
    Tensor pointwise_weight;                      // [d×c]
    Tensor pointwise_bias;                        // [c]
};

// Registers "<prefix>.dw<k>.w", "<prefix>.dw<k>.b", "<prefix>.pw.w", "<prefix>.pw.b".
SadeParams sade_init(ParameterStore& store, const SadeConfig& cfg, const std::string& prefix = "sade");
SadeParams sade_bind(const ParameterStore& store, const SadeConfig& cfg, const std::string& prefix = "sade");

struct SadeOutput {
    Tensor v_pre;   // [n×d], mean of ReLU'd depthwise branches
    Tensor v;       // [n×c]
};

SadeOutput sade_forward(const Tensor& e, const SadeParams& params);

} // namespace mrfe
