// SPDX-License-Identifier: Apache-2.0
#include "skillalign/csv.hpp"

#include <fstream>
#include <sstream>

#include "skillalign/errors.hpp"

namespace skillalign {

std::vector<CsvRow> read_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    std::string field;
    CsvRow row;
    row.line = 1;
    std::size_t line = 1;
    bool in_quotes = false;
    bool row_started = false;
    char c;

    auto end_field = [&] {
        row.fields.push_back(field);
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row = CsvRow{};
        row.line = line;
        row_started = false;
    };

    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                end_field();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                ++line;
                if (row_started || !field.empty() || !row.fields.empty()) end_row();
                row.line = line;
                break;
            default:
                field += c;
                row_started = true;
                break;
        }
    }
    if (in_quotes) throw ValidationError("csv: unterminated quoted field starting before line " + std::to_string(line));
    if (row_started || !field.empty() || !row.fields.empty()) end_row();
    return rows;
}

std::vector<CsvRow> read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    return read_csv(in);
}

std::string csv_escape(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    return out;
}

}  // namespace skillalign
