#include "rads/csv.hpp"

#include "rads/error.hpp"

namespace rads::csv {

std::vector<Row> parse(std::string_view text, char delimiter) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // distinguishes "" from no field at all on a line
    std::size_t i = 0;
    const auto n = text.size();

    // skip UTF-8 BOM
    if (n >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    for (; i < n; ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            in_quotes = true;
            field_started = true;
        } else if (c == delimiter) {
            end_field();
            field_started = true;
        } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
            // handled by the following '\n'
        } else if (c == '\n') {
            end_row();
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted CSV field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

char sniff_delimiter(std::string_view text) {
    std::size_t commas = 0, semicolons = 0;
    bool in_quotes = false;
    int lines = 0;
    for (char c : text) {
        if (c == '"') in_quotes = !in_quotes;
        else if (!in_quotes && c == ',') ++commas;
        else if (!in_quotes && c == ';') ++semicolons;
        else if (!in_quotes && c == '\n' && ++lines >= 20) break;
    }
    return semicolons > commas ? ';' : ',';
}

std::string escape_field(std::string_view field, char delimiter) {
    if (field.find_first_of(std::string{delimiter, '"', '\r', '\n'}) == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const Row& row, char delimiter) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(delimiter);
        out += escape_field(row[i], delimiter);
    }
    return out;
}

}  // namespace rads::csv
