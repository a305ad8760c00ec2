#include "mrfe/config.hpp"

#include "mrfe/errors.hpp"
#include "mrfe/text_util.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>

namespace mrfe::inline MRFE_PRECISION {

std::vector<KvEntry> parse_kv(std::istream& in) {
    std::vector<KvEntry> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError("config line " + std::to_string(line_no) + ": expected key=value");
        auto key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw ParseError("config line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(key).second) {
            throw ParseError("config line " + std::to_string(line_no) + ": key '" + key + "' repeated");
        }
        out.push_back({std::move(key), trim(std::string_view(t).substr(eq + 1)), line_no});
    }
    return out;
}

std::vector<KvEntry> load_kv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string());
    return parse_kv(in);
}

void write_kv(std::ostream& out, const std::map<std::string, std::string>& values) {
    for (const auto& [k, v] : values) out << k << " = " << v << '\n';
}

bool parse_bool(const std::string& key, const std::string& value) {
    const auto v = to_lower(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + value + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
    }
    return out;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace mrfe
