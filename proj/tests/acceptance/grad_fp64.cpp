#include "grad_fp64.hpp"

#include "mrfe/gradcheck.hpp"

std::vector<GradCaseError> gradcheck_cases(std::uint64_t seed, double eps) {
    std::vector<GradCaseError> out;
    for (const auto& c : mrfe::gradcheck_suite(seed, eps)) out.push_back({c.name, c.result.max_relative_error});
    return out;
}
