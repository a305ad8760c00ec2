#pragma once

#include "mrfe/precision.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mrfe::inline MRFE_PRECISION::csv {

using Row = std::vector<std::string>;

struct Record {
    Row fields;
    std::size_t line = 0;   // 1-based line where the record starts
};

// RFC 4180 reader: quoted fields may hold commas, doubled quotes and line
// breaks; CRLF and LF endings are both accepted. Throws ParseError with the
// line number on malformed quoting.
std::vector<Record> read(std::istream& in);
std::vector<Record> read_file(const std::filesystem::path& path);

std::string escape(const std::string& field);
void write_row(std::ostream& out, const Row& row);

} // namespace mrfe::csv
