#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/parameter_store.hpp"
#include "mrfe/tensor.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

struct GradCheckResult {
    double max_relative_error = 0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double worst_analytic = 0;
    double worst_numeric = 0;
    std::size_t coordinates = 0;
};

/// Compares reverse-mode gradients of a scalar function against central
/// differences, one coordinate of every parameter at a time.
///
/// The per-coordinate error is |analytic − numeric| / (|analytic| + |numeric| + 1e-8)
/// and the maximum is returned. `loss` must rebuild its graph from the
/// current parameter values on every call.
GradCheckResult finite_difference_check(const std::function<Tensor()>& loss, ParameterStore& params,
                                        double eps = 1e-3);

struct GradCheckCase {
    std::string name;
    GradCheckResult result;
};

/// Central-difference checks of every layer (linear, depthwise k ∈ {1,3,5,7},
/// SADE, full convolution, BiLSTM, attention pooling, emotion space, EECE, both
/// stream fusions, head) and of the micro model (d=8, c=6, h=4, d_a=3, |E|=3,
/// n=6, C=2) under every fusion mode and with the convolution encoder.
/// Meaningful in the double-precision build.
std::vector<GradCheckCase> gradcheck_suite(std::uint64_t seed, double eps = 1e-5);

} // namespace mrfe
