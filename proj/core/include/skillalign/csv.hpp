// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace skillalign {

/// One parsed CSV record plus the 1-based line number it started on.
struct CsvRow {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

/// RFC-4180-style reader: comma separated, double-quote quoting, quotes
/// escaped by doubling, quoted fields may contain commas and newlines.
/// Lines starting with '#' outside of a record are returned too (callers
/// that use metadata lines filter them).
std::vector<CsvRow> read_csv(std::istream& in);

std::vector<CsvRow> read_csv_file(const std::string& path);

/// Quotes a field if it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

std::string csv_join(const std::vector<std::string>& fields);

}  // namespace skillalign
