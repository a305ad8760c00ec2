#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

/// Named trainable tensors in insertion order, plus the generator that
/// initialised them.
class ParameterStore {
public:
    explicit ParameterStore(std::uint64_t seed = 0);

    // Registers an existing tensor; it is marked requires_grad.
    Tensor add(const std::string& name, Tensor tensor);

    // uniform(−√(1/fan_in), +√(1/fan_in)) drawn from the store's generator.
    Tensor add_uniform(const std::string& name, Shape shape, std::size_t fan_in);
    Tensor add_zeros(const std::string& name, Shape shape);

    bool contains(const std::string& name) const;
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;

    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t parameter_count() const;

    auto begin() noexcept { return entries_.begin(); }
    auto end() noexcept { return entries_.end(); }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    void zero_grad();

    std::uint64_t seed() const noexcept { return seed_; }
    std::mt19937_64& rng() noexcept { return rng_; }

    // Deep copy: fresh storage, no gradients.
    ParameterStore clone() const;

    // Overwrites values of matching entries; names and shapes must agree.
    void copy_values_from(const ParameterStore& other);

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    std::uint64_t seed_;
    std::mt19937_64 rng_;
};

void fill_uniform(Tensor& tensor, double bound, std::mt19937_64& rng);

// Binary checkpoint: "CKPT", u32 version = 1, u32 entry count, then per entry
// u16 name length, UTF-8 name, u8 rank, u32 dims, float32 data. Little-endian.
void write_checkpoint(std::ostream& out, const ParameterStore& store);
ParameterStore read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store);
ParameterStore load_checkpoint(const std::filesystem::path& path);

} // namespace mrfe
