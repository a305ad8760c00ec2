#include "mrfe/sade.hpp"

#include "mrfe/errors.hpp"
#include "mrfe/ops.hpp"
#include "mrfe/text_util.hpp"

#include <algorithm>
#include <charconv>

namespace mrfe::inline MRFE_PRECISION {

void SadeConfig::validate() const {
    if (kernels.empty()) throw ConfigError("kernel set must not be empty");
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        if (kernels[i] % 2 == 0) throw ConfigError("kernel size " + std::to_string(kernels[i]) + " is not odd");
        if (i > 0 && kernels[i] <= kernels[i - 1]) {
            throw ConfigError("kernel set " + kernel_list_str(kernels) + " must be ascending without repeats");
        }
    }
    if (d == 0 || c == 0) throw ConfigError("SADE widths must be positive");
}

std::vector<std::size_t> parse_kernel_list(std::string_view text) {
    std::vector<std::size_t> out;
    for (const auto& part : split(text, ',')) {
        const auto t = trim(part);
        std::size_t k = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), k);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
            throw ConfigError("bad kernel size '" + t + "' in '" + std::string(text) + "'");
        }
        out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    SadeConfig probe;
    probe.kernels = out;
    probe.validate();
    return out;
}

std::string kernel_list_str(const std::vector<std::size_t>& kernels) {
    std::string out;
    for (auto k : kernels) {
        if (!out.empty()) out.push_back(',');
        out += std::to_string(k);
    }
    return out;
}

std::size_t sade_param_count(const SadeConfig& cfg) {
    cfg.validate();
    std::size_t n = 0;
    for (auto k : cfg.kernels) n += cfg.d * (k + 1);
    return n + cfg.d * cfg.c + cfg.c;
}

SadeParams sade_init(ParameterStore& store, const SadeConfig& cfg, const std::string& prefix) {
    cfg.validate();
    SadeParams p;
    for (auto k : cfg.kernels) {
        const auto name = prefix + ".dw" + std::to_string(k);
        auto w = store.add_uniform(name + ".w", {cfg.d, k}, k);
        auto b = store.add_uniform(name + ".b", {cfg.d}, k);
        p.branches.emplace(k, SadeBranch{w, b});
    }
    p.pointwise_weight = store.add_uniform(prefix + ".pw.w", {cfg.d, cfg.c}, cfg.d);
    p.pointwise_bias = store.add_uniform(prefix + ".pw.b", {cfg.c}, cfg.d);
    return p;
}

SadeParams sade_bind(const ParameterStore& store, const SadeConfig& cfg, const std::string& prefix) {
    cfg.validate();
    SadeParams p;
    for (auto k : cfg.kernels) {
        const auto name = prefix + ".dw" + std::to_string(k);
        p.branches.emplace(k, SadeBranch{store.get(name + ".w"), store.get(name + ".b")});
    }
    p.pointwise_weight = store.get(prefix + ".pw.w");
    p.pointwise_bias = store.get(prefix + ".pw.b");
    return p;
}

SadeOutput sade_forward(const Tensor& e, const SadeParams& params) {
    if (params.branches.empty()) throw ConfigError("SADE has no kernel branches");
    if (e.rank() != 2) throw DimensionError("SADE input must be [n×d], got " + shape_str(e.shape()));
    std::vector<Tensor> branches;
    branches.reserve(params.branches.size());
    for (const auto& [k, b] : params.branches) {
        if (b.weight.dim(0) != e.dim(1)) {
            throw DimensionError("SADE branch k=" + std::to_string(k) + " expects width " +
                                 std::to_string(b.weight.dim(0)) + ", input is " + shape_str(e.shape()));
        }
        branches.push_back(relu(conv1d_depthwise(e, b.weight, b.bias, k)));
    }
    SadeOutput out;
    out.v_pre = mean_of(branches);
    out.v = conv1d_pointwise(out.v_pre, params.pointwise_weight, params.pointwise_bias);
    return out;
}

} // namespace mrfe
