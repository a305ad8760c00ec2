#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/parameter_store.hpp"

#include <cstdint>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-5;

    void validate() const;
};

// First and second moments per parameter, in store order.
struct AdamWState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t step = 0;
};

/// One AdamW update from the gradients currently held by the store:
///   θ ← θ·(1 − lr·wd)                       (decoupled decay)
///   θ ← θ − lr · m̂ / (√v̂ + ε)               (bias-corrected Adam)
/// Parameters without a gradient buffer are treated as having zero gradient.
void adamw_step(ParameterStore& store, AdamWState& state, const AdamWConfig& cfg);

} // namespace mrfe
