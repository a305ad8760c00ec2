#pragma once

#include "mrfe/precision.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

struct KvEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

// "key = value" lines; blank lines and lines starting with '#' are skipped.
// Throws ParseError (with the line number) on a line without '=' or a repeated key.
std::vector<KvEntry> parse_kv(std::istream& in);
std::vector<KvEntry> load_kv(const std::filesystem::path& path);
void write_kv(std::ostream& out, const std::map<std::string, std::string>& values);

// Strict scalar parsers; errors name the key.
bool parse_bool(const std::string& key, const std::string& value);
std::size_t parse_size(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);
std::string format_double(double v);

} // namespace mrfe
