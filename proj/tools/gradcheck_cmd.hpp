#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

// Runs the double-precision gradient-check suite, prints one line per case and
// writes gradcheck.csv under `out`. Returns 0 when every case is below `tolerance`.
int run_gradcheck(std::uint64_t seed, double tolerance, const std::filesystem::path& out, std::ostream& log);
