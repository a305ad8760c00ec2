#pragma once

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

namespace mrfe {

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index in [0, bound).
inline std::size_t pick_index(std::size_t bound, std::mt19937_64& rng) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(bound));
}

template <typename T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
    return items[pick_index(items.size(), rng)];
}

// Fisher-Yates; the same seed gives the same permutation on every platform.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        using std::swap;
        swap(items[i - 1], items[pick_index(i, rng)]);
    }
}

} // namespace mrfe
