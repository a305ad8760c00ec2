#include "mrfe/optimizer.hpp"

#include "mrfe/errors.hpp"

#include <cmath>
#include <span>
#include <utility>

namespace mrfe::inline MRFE_PRECISION {

void AdamWConfig::validate() const {
    if (!(lr > 0)) throw ConfigError("learning rate must be positive");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(eps > 0)) throw ConfigError("Adam epsilon must be positive");
    if (!(weight_decay >= 0)) throw ConfigError("weight decay must be non-negative");
}

void adamw_step(ParameterStore& store, AdamWState& state, const AdamWConfig& cfg) {
    if (state.m.empty()) {
        for (const auto& [name, t] : store) {
            state.m.emplace_back(t.numel(), 0.0);
            state.v.emplace_back(t.numel(), 0.0);
        }
    }
    if (state.m.size() != store.size()) throw ConfigError("optimizer state does not match the parameter store");
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    const double shrink = 1.0 - cfg.lr * cfg.weight_decay;
    std::size_t p = 0;
    for (auto& [name, t] : store) {
        auto values = t.mutable_data();
        const bool has = t.has_grad();
        const auto grad = has ? std::as_const(t).grad() : std::span<const Scalar>{};
        auto& m = state.m[p];
        auto& v = state.v[p];
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = has ? static_cast<double>(grad[i]) : 0.0;
            double theta = static_cast<double>(values[i]) * shrink;
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            theta -= cfg.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.eps);
            values[i] = static_cast<Scalar>(theta);
        }
        ++p;
    }
}

} // namespace mrfe
