#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rads {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

[[nodiscard]] std::string_view trim(std::string_view s);
[[nodiscard]] std::string to_lower(std::string_view s);
[[nodiscard]] bool iequals(std::string_view a, std::string_view b);
[[nodiscard]] bool starts_with_icase(std::string_view s, std::string_view prefix);
[[nodiscard]] std::vector<std::string> split(std::string_view s, char sep);
[[nodiscard]] std::string join(const std::vector<std::string>& parts, std::string_view sep);
[[nodiscard]] bool contains_letter(std::string_view s);

/// Replaces invalid UTF-8 sequences with U+FFFD. Returns true if any were replaced.
bool sanitize_utf8(std::string& s);
void append_utf8(std::string& out, char32_t cp);

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff](Z|+00:00)". Throws DataError on anything else.
[[nodiscard]] Timestamp parse_timestamp(std::string_view text);
/// Formats as "YYYY-MM-DDTHH:MM:SSZ", with ".fff" only when milliseconds are non-zero.
[[nodiscard]] std::string format_timestamp(Timestamp t);
[[nodiscard]] Timestamp now_utc();

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// "54.50% (327/600)" style percentage with half-up rounding to two decimals.
/// Returns hundredths of a percent, exact integer arithmetic.
[[nodiscard]] long long percent_hundredths(long long count, long long denominator);
[[nodiscard]] std::string format_percent(long long hundredths);

}  // namespace rads
