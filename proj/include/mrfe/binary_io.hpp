#pragma once

#include "mrfe/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace mrfe::binio {

// Little-endian primitive writers and offset-tracking readers shared by the
// checkpoint and contextual-embedding formats.

template <typename UInt>
void put_uint(std::ostream& out, UInt value) {
    char bytes[sizeof(UInt)];
    for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    out.write(bytes, sizeof(UInt));
}

inline void put_f32(std::ostream& out, float value) { put_uint(out, std::bit_cast<std::uint32_t>(value)); }

inline void put_i32(std::ostream& out, std::int32_t value) {
    put_uint(out, static_cast<std::uint32_t>(value));
}

class Reader {
public:
    Reader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

    void bytes(char* dst, std::size_t count) {
        in_.read(dst, static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in_.gcount()) != count) {
            throw FormatError(what_ + ": truncated at byte offset " +
                              std::to_string(offset_ + static_cast<std::size_t>(in_.gcount())) + " (needed " +
                              std::to_string(count) + " bytes at offset " + std::to_string(offset_) + ")");
        }
        offset_ += count;
    }

    template <typename UInt>
    UInt uint() {
        unsigned char raw[sizeof(UInt)];
        bytes(reinterpret_cast<char*>(raw), sizeof(UInt));
        UInt v = 0;
        for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(raw[i]) << (8 * i);
        return v;
    }

    float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
    std::int32_t i32() { return static_cast<std::int32_t>(uint<std::uint32_t>()); }

    std::size_t offset() const noexcept { return offset_; }
    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

    [[noreturn]] void fail(const std::string& message, std::size_t at) const {
        throw FormatError(what_ + ": " + message + " at byte offset " + std::to_string(at));
    }

private:
    std::istream& in_;
    std::string what_;
    std::size_t offset_ = 0;
};

} // namespace mrfe::binio
