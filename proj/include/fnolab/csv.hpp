#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "fnolab/common.hpp"

// Small RFC-4180 CSV layer: comma separator, '"' quoting with doubled quotes,
// tolerant of CRLF line endings and quoted embedded newlines on read; fields
// are quoted on write only when they need it. '.' is the decimal separator by
// construction (format_double).

namespace fnolab::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string join_row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += escape(fields[i]);
    }
    return line;
}

// Parses the full text into records. A trailing newline does not create an
// empty record.
inline std::vector<std::vector<std::string>> parse(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, field_started = false, row_started = false;
    std::size_t i = 0;
    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        records.push_back(row);
        row.clear();
        row_started = false;
    };
    while (i < text.size()) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
                ++i;
                continue;
            }
            field += c;
            ++i;
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = row_started = true;
            ++i;
            continue;
        }
        if (c == ',') {
            end_field();
            row_started = true;
            ++i;
            continue;
        }
        if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            ++i;
            if (row_started || field_started || !row.empty() || !field.empty())
                end_row();
            continue;
        }
        field += c;
        field_started = row_started = true;
        ++i;
    }
    if (quoted) throw IoError("csv: unterminated quoted field");
    if (row_started || field_started || !row.empty() || !field.empty()) end_row();
    return records;
}

inline Table read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    auto records = parse(text);
    Table t;
    if (records.empty()) throw IoError("csv: " + path + " has no header");
    t.header = std::move(records.front());
    t.rows.assign(records.begin() + 1, records.end());
    return t;
}

inline void write_file(const std::string& path, const Table& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os << join_row(t.header) << '\n';
    for (const auto& row : t.rows) os << join_row(row) << '\n';
    if (!os.flush()) throw IoError("failed writing " + path);
}

}  // namespace fnolab::csv
