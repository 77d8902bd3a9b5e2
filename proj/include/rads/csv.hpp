#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rads::csv {

using Row = std::vector<std::string>;

/// RFC-4180 reader: quoted fields may hold delimiters, CR/LF and doubled quotes.
/// Accepts LF or CRLF record separators. A trailing newline does not produce an
/// empty record. Throws DataError on an unterminated quoted field.
[[nodiscard]] std::vector<Row> parse(std::string_view text, char delimiter = ',');

/// Picks ',' or ';' by counting unquoted occurrences in the first records.
[[nodiscard]] char sniff_delimiter(std::string_view text);

/// Quotes only when the field holds the delimiter, a quote, CR or LF.
[[nodiscard]] std::string escape_field(std::string_view field, char delimiter = ',');
[[nodiscard]] std::string format_row(const Row& row, char delimiter = ',');

}  // namespace rads::csv
