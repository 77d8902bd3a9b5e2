#pragma once

#include "rads/domain.hpp"
#include "rads/util.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rads {

/// Header line of a capture CSV file, byte for byte.
inline constexpr std::string_view capture_csv_header = "timestamp,api_name,category,operation,return_value,call_stack";

struct CaptureRecord {
    Timestamp timestamp{};
    std::string api_name;
    DataCategory category = DataCategory::IPAddress;
    std::string operation;
    std::string return_value;
    std::string call_stack;

    friend bool operator==(const CaptureRecord&, const CaptureRecord&) = default;
};

/// Throws DataError on a header mismatch, a bad timestamp, an empty api_name or
/// an unknown category; the message names the 1-based data record.
[[nodiscard]] std::vector<CaptureRecord> parse_capture_csv(std::string_view text);
[[nodiscard]] std::vector<CaptureRecord> ingest_capture_csv(const std::filesystem::path& path);
[[nodiscard]] std::string write_capture_csv(const std::vector<CaptureRecord>& records);

struct CanonicalOptions {
    int location_decimals = 4;
};

/// Per-category normal form used for equality. Throws DataError when the value
/// cannot be read as the category (e.g. a non-numeric latitude).
[[nodiscard]] std::string canonicalize(DataCategory category, std::string_view raw, const CanonicalOptions& opts = {});

/// One coordinate rounded like a Location component, or nullopt if not numeric.
[[nodiscard]] std::optional<std::string> canonical_coordinate(std::string_view raw, const CanonicalOptions& opts = {});

struct CapturedProfile {
    std::string app_id;
    std::map<DataCategory, std::set<std::string>> values;
    std::set<DataCategory> empty_returns;  // collected, but some call returned nothing
    std::vector<std::string> warnings;     // sorted
    std::optional<long long> session_seconds;  // how long the app was exercised, as reported by the operator

    friend bool operator==(const CapturedProfile&, const CapturedProfile&) = default;

    [[nodiscard]] bool collected(DataCategory c) const { return values.count(c) > 0; }
};

/// A category is collected when at least one record names it. Empty returns are
/// kept as "" and flagged; values that fail to canonicalize are kept trimmed
/// with a warning.
[[nodiscard]] CapturedProfile build_profile(const std::string& app_id, const std::vector<CaptureRecord>& records,
                                            const CanonicalOptions& opts = {});

[[nodiscard]] std::string profile_to_json(const CapturedProfile& p);
[[nodiscard]] CapturedProfile profile_from_json(std::string_view text);

struct HookEntry {
    std::string api_signature;
    DataCategory category = DataCategory::IPAddress;
    std::string capture;  // "return_value" or "argument:N"
    std::optional<std::pair<int, std::string>> when_argument;
};

struct HookConfig {
    int version = 0;
    std::vector<HookEntry> entries;
};

/// Rejects duplicate signatures, unknown categories and bad capture specs.
[[nodiscard]] HookConfig parse_hook_config(std::string_view text);
[[nodiscard]] const HookConfig& default_hook_config();

}  // namespace rads
