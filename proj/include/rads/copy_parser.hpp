#pragma once

#include "rads/domain.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rads {

enum class CopyFormat { CSV, JSON, HTML, TXT, PDF };

[[nodiscard]] std::string_view to_string(CopyFormat f);
[[nodiscard]] std::optional<CopyFormat> parse_copy_format(std::string_view s);

/// HTML, TXT and PDF copies are compared by hand.
[[nodiscard]] inline bool needs_manual_assist(CopyFormat f) {
    return f == CopyFormat::HTML || f == CopyFormat::TXT || f == CopyFormat::PDF;
}

/// The extension (with or without the dot, may be empty) decides when it is
/// recognized; otherwise the content is sniffed. Empty input is a DataError.
[[nodiscard]] CopyFormat detect_format(std::string_view bytes, std::string_view extension);
[[nodiscard]] CopyFormat detect_format(const std::filesystem::path& path);

/// Description -> values, in first-seen order. Repeated descriptions accumulate.
class FlatRecord {
public:
    using Entry = std::pair<std::string, std::vector<std::string>>;

    void add(const std::string& description, std::string value);

    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] const std::vector<std::string>* find(const std::string& description) const;
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] std::size_t value_count() const noexcept;
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

    friend bool operator==(const FlatRecord& a, const FlatRecord& b) { return a.entries_ == b.entries_; }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class Orientation { Auto, A, B };

[[nodiscard]] std::optional<Orientation> parse_orientation(std::string_view s);

struct CsvCopyOptions {
    Orientation orientation = Orientation::Auto;
    char delimiter = 0;  // 0 sniffs ',' or ';'
};

/// Orientation A: the first row holds descriptions, each column its values.
/// Orientation B: the first column holds descriptions, the remaining cells of a
/// row its values. Auto picks B for two-column tables whose first column looks
/// like labels, A otherwise, and refuses to guess when both columns look alike.
[[nodiscard]] FlatRecord parse_csv_copy(std::string_view bytes, const CsvCopyOptions& opts = {});
[[nodiscard]] Orientation guess_orientation(const std::vector<std::vector<std::string>>& rows);

/// Depth-first flattening. Object keys are joined with '.', array elements use
/// their 0-based index. '.' and '\' inside keys are escaped with '\'.
/// Null leaves and empty containers contribute nothing.
[[nodiscard]] FlatRecord parse_json_copy(std::string_view bytes);

[[nodiscard]] std::string escape_key_segment(std::string_view key);
/// Inverse of joining escaped segments with '.'.
[[nodiscard]] std::vector<std::string> split_description(std::string_view description);

/// Parses a CSV or JSON copy; other formats raise UsageError.
[[nodiscard]] FlatRecord parse_copy(std::string_view bytes, CopyFormat format, const CsvCopyOptions& opts = {});

struct DescriptorDictionary {
    int version = 0;
    std::map<DataCategory, std::vector<std::string>> patterns;
    std::string latitude_pattern;
    std::string longitude_pattern;

    std::map<DataCategory, std::vector<std::regex>> compiled;
    std::regex latitude;
    std::regex longitude;

    /// True when any pattern of the category matches any segment of the description.
    [[nodiscard]] bool matches(DataCategory c, const std::vector<std::string>& segments) const;
    [[nodiscard]] bool is_latitude(std::string_view description) const;
    [[nodiscard]] bool is_longitude(std::string_view description) const;
};

/// {"version": n, "categories": {"<Category>": [regex, ...]}, "latitude": regex, "longitude": regex}
[[nodiscard]] DescriptorDictionary parse_descriptor_dictionary(std::string_view text);
[[nodiscard]] const DescriptorDictionary& default_descriptor_dictionary();

struct ExtractedValue {
    std::string description;
    std::string value;

    friend bool operator==(const ExtractedValue&, const ExtractedValue&) = default;
    friend auto operator<=>(const ExtractedValue&, const ExtractedValue&) = default;
};

/// Only categories with at least one match appear.
using CategoryExtraction = std::map<DataCategory, std::vector<ExtractedValue>>;

[[nodiscard]] CategoryExtraction match_categories(const FlatRecord& rec, const DescriptorDictionary& dict);

/// Union of per-file extractions of one app, dropping repeated pairs.
void merge_extraction(CategoryExtraction& into, const CategoryExtraction& from);

[[nodiscard]] std::string extraction_to_json(const CategoryExtraction& ex);
[[nodiscard]] CategoryExtraction extraction_from_json(std::string_view text);

/// JSON skeleton with one empty list per category; once filled in by hand it is
/// itself a JSON copy that parses and matches like any other.
[[nodiscard]] std::string manual_assist_template();

}  // namespace rads
