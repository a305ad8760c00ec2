#pragma once

#include <cstdint>
#include <string>
#include <vector>

struct GradCaseError {
    std::string name;
    double max_relative_error;
};

// Double-precision gradient-check suite; plain types so a float build can call it.
std::vector<GradCaseError> gradcheck_cases(std::uint64_t seed, double eps);
