#pragma once

#include "mrfe/precision.hpp"

#include "mrfe/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

enum class EmbeddingSource { trainable_table, contextual_file };

struct EmbeddingMatrix {
    Tensor values;   // [n×d]
    EmbeddingSource source = EmbeddingSource::trainable_table;

    std::size_t length() const { return values.dim(0); }
    std::size_t width() const { return values.dim(1); }
};

// Row i is table[ids[i]]; gradients flow into the table. Throws VocabError on an
// id outside the table.
EmbeddingMatrix embed(std::span<const std::size_t> ids, const Tensor& table);

struct ContextualRecord {
    EmbeddingMatrix embedding;
    std::int32_t label = 0;
};

// "CEMB", u32 version = 1, u32 record count; per record u32 n, u32 d, float32
// n×d row-major block, i32 label. Little-endian.
void write_contextual(std::ostream& out, const std::vector<ContextualRecord>& records);
void save_contextual(const std::filesystem::path& path, const std::vector<ContextualRecord>& records);

// Throws FormatError with the byte offset on bad magic/version, truncation,
// trailing bytes or a width that differs from the first record's.
std::vector<ContextualRecord> read_contextual(std::istream& in);
std::vector<ContextualRecord> load_contextual(const std::filesystem::path& path);

} // namespace mrfe
