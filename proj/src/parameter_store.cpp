#include "mrfe/parameter_store.hpp"

#include "mrfe/binary_io.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/ops.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace mrfe::inline MRFE_PRECISION {

namespace {
constexpr char kCheckpointMagic[4] = {'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;
} // namespace

ParameterStore::ParameterStore(std::uint64_t seed) : seed_(seed), rng_(seed) {}

Tensor ParameterStore::add(const std::string& name, Tensor tensor) {
    if (index_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    tensor.set_requires_grad(true);
    index_.emplace(name, entries_.size());
    entries_.emplace_back(name, std::move(tensor));
    return entries_.back().second;
}

Tensor ParameterStore::add_uniform(const std::string& name, Shape shape, std::size_t fan_in) {
    auto t = Tensor::zeros(std::move(shape));
    fill_uniform(t, std::sqrt(1.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1))), rng_);
    return add(name, std::move(t));
}

Tensor ParameterStore::add_zeros(const std::string& name, Shape shape) {
    return add(name, Tensor::zeros(std::move(shape)));
}

bool ParameterStore::contains(const std::string& name) const { return index_.count(name) != 0; }

Tensor& ParameterStore::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return entries_[it->second].second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return entries_[it->second].second;
}

std::size_t ParameterStore::parameter_count() const {
    std::size_t total = 0;
    for (const auto& [name, t] : entries_) total += t.numel();
    return total;
}

void ParameterStore::zero_grad() {
    for (auto& [name, t] : entries_) t.zero_grad();
}

ParameterStore ParameterStore::clone() const {
    ParameterStore copy(seed_);
    copy.rng_ = rng_;
    for (const auto& [name, t] : entries_) copy.add(name, t.detach());
    return copy;
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
    for (auto& [name, t] : entries_) {
        const auto& src = other.get(name);
        if (src.shape() != t.shape()) {
            throw DimensionError("parameter '" + name + "' has shape " + shape_str(t.shape()) + ", source has " +
                                 shape_str(src.shape()));
        }
        std::copy(src.data().begin(), src.data().end(), t.mutable_data().begin());
    }
}

void fill_uniform(Tensor& tensor, double bound, std::mt19937_64& rng) {
    for (auto& v : tensor.mutable_data()) v = static_cast<Scalar>((2.0 * uniform01(rng) - 1.0) * bound);
}

void write_checkpoint(std::ostream& out, const ParameterStore& store) {
    out.write(kCheckpointMagic, 4);
    binio::put_uint<std::uint32_t>(out, kCheckpointVersion);
    binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
    for (const auto& [name, t] : store) {
        if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw FormatError("checkpoint: parameter name too long: " + name);
        }
        binio::put_uint<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        binio::put_uint<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
        for (auto d : t.shape()) binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        for (auto v : t.data()) binio::put_f32(out, static_cast<float>(v));
    }
    if (!out) throw FormatError("checkpoint: write failed");
}

ParameterStore read_checkpoint(std::istream& in) {
    binio::Reader r(in, "checkpoint");
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0) r.fail("bad magic", 0);
    const auto version = r.uint<std::uint32_t>();
    if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version), 4);
    const auto count = r.uint<std::uint32_t>();
    ParameterStore store;
    for (std::uint32_t e = 0; e < count; ++e) {
        const auto name_len = r.uint<std::uint16_t>();
        std::string name(name_len, '\0');
        r.bytes(name.data(), name_len);
        const auto rank_at = r.offset();
        const auto rank = r.uint<std::uint8_t>();
        if (rank > 3) r.fail("rank " + std::to_string(rank) + " exceeds 3", rank_at);
        Shape shape(rank);
        for (auto& d : shape) d = r.uint<std::uint32_t>();
        std::vector<Scalar> values(shape_numel(shape));
        for (auto& v : values) v = static_cast<Scalar>(r.f32());
        const auto at = r.offset();
        try {
            store.add(name, Tensor::from(std::move(shape), std::move(values)));
        } catch (const ConfigError&) {
            r.fail("duplicate entry '" + name + "'", at);
        }
    }
    if (!r.at_end()) r.fail("trailing bytes", r.offset());
    return store;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("checkpoint: cannot open " + path.string() + " for writing");
    write_checkpoint(out, store);
}

ParameterStore load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("checkpoint: cannot open " + path.string());
    return read_checkpoint(in);
}

} // namespace mrfe
