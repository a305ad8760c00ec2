#include "mrfe/csv.hpp"

#include "mrfe/errors.hpp"

#include <fstream>
#include <iterator>
#include <ostream>

namespace mrfe::inline MRFE_PRECISION::csv {

std::vector<Record> read(std::istream& in) {
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<Record> records;
    Record cur;
    std::string field;
    std::size_t line = 1;
    cur.line = 1;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool row_has_content = false;

    auto end_field = [&] {
        cur.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        records.push_back(std::move(cur));
        cur = Record{};
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            if (!field.empty() || field_was_quoted) {
                throw ParseError("csv line " + std::to_string(line) + ": unexpected quote inside unquoted field");
            }
            in_quotes = true;
            field_was_quoted = true;
            row_has_content = true;
        } else if (c == ',') {
            end_field();
            row_has_content = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (row_has_content || !field.empty()) end_row();
            ++line;
            cur.line = line;
        } else {
            if (field_was_quoted) {
                throw ParseError("csv line " + std::to_string(line) + ": characters after closing quote");
            }
            field.push_back(c);
            row_has_content = true;
        }
    }
    if (in_quotes) throw ParseError("csv line " + std::to_string(cur.line) + ": unterminated quoted field");
    if (row_has_content || !field.empty()) end_row();
    return records;
}

std::vector<Record> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open csv file " + path.string());
    return read(in);
}

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << escape(row[i]);
    }
    out << "\r\n";
}

} // namespace mrfe::csv
