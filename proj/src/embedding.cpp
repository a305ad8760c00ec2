#include "mrfe/embedding.hpp"

#include "mrfe/binary_io.hpp"
#include "mrfe/errors.hpp"
#include "mrfe/ops.hpp"

#include <fstream>

namespace mrfe::inline MRFE_PRECISION {

namespace {
constexpr char kMagic[4] = {'C', 'E', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;
} // namespace

EmbeddingMatrix embed(std::span<const std::size_t> ids, const Tensor& table) {
    if (table.rank() != 2) throw DimensionError("embed: table must be rank 2, got " + shape_str(table.shape()));
    return {gather_rows(table, ids), EmbeddingSource::trainable_table};
}

void write_contextual(std::ostream& out, const std::vector<ContextualRecord>& records) {
    out.write(kMagic, 4);
    binio::put_uint<std::uint32_t>(out, kVersion);
    binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
    for (const auto& r : records) {
        const auto& v = r.embedding.values;
        if (v.rank() != 2) throw DimensionError("contextual record must be rank 2, got " + shape_str(v.shape()));
        binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(v.dim(0)));
        binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(v.dim(1)));
        for (Scalar x : v.data()) binio::put_f32(out, static_cast<float>(x));
        binio::put_i32(out, r.label);
    }
}

void save_contextual(const std::filesystem::path& path, const std::vector<ContextualRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write embedding file " + path.string());
    write_contextual(out, records);
}

std::vector<ContextualRecord> read_contextual(std::istream& in) {
    binio::Reader rd(in, "embedding file");
    char magic[4];
    rd.bytes(magic, 4);
    if (!std::equal(magic, magic + 4, kMagic)) rd.fail("bad magic", 0);
    const auto version = rd.uint<std::uint32_t>();
    if (version != kVersion) rd.fail("unsupported version " + std::to_string(version), 4);
    const auto count = rd.uint<std::uint32_t>();

    std::vector<ContextualRecord> out;
    std::size_t width = 0;
    for (std::uint32_t r = 0; r < count; ++r) {
        const auto at = rd.offset();
        const auto n = rd.uint<std::uint32_t>();
        const auto d = rd.uint<std::uint32_t>();
        if (r == 0) width = d;
        else if (d != width) {
            rd.fail("record " + std::to_string(r) + " has width " + std::to_string(d) + ", expected " +
                        std::to_string(width),
                    at + 4);
        }
        std::vector<Scalar> values(static_cast<std::size_t>(n) * d);
        for (auto& v : values) v = static_cast<Scalar>(rd.f32());
        const auto label = rd.i32();
        out.push_back({{Tensor::from({n, d}, std::move(values)), EmbeddingSource::contextual_file}, label});
    }
    if (!rd.at_end()) rd.fail("trailing bytes after " + std::to_string(count) + " records", rd.offset());
    return out;
}

std::vector<ContextualRecord> load_contextual(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open embedding file " + path.string());
    return read_contextual(in);
}

} // namespace mrfe
