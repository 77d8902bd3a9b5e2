#pragma once

#include "rads/capture_store.hpp"
#include "rads/copy_parser.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rads {

enum class ConsistencyStatus { NotCollected, MatchedConsistent, PresentButMismatch, AbsentFromCopy };

[[nodiscard]] std::string_view to_string(ConsistencyStatus s);
[[nodiscard]] std::optional<ConsistencyStatus> parse_consistency_status(std::string_view s);

struct CompareOptions {
    CanonicalOptions canonical;
    bool lenient_ip = false;  // IPv4 agreement on the /24 prefix
};

struct AppCompletenessResult {
    std::string app_id;
    std::map<DataCategory, ConsistencyStatus> per_category;  // all ten categories
    int collected = 0;
    int missing = 0;
    std::optional<double> missing_rate;  // absent when nothing was collected
    bool no_collection = false;

    friend bool operator==(const AppCompletenessResult&, const AppCompletenessResult&) = default;
};

struct LocationValues {
    std::set<std::string> full;          // canonical "lat,lon"
    std::set<std::string> latitudes;     // every latitude half, canonical
    std::set<std::string> longitudes;    // every longitude half, canonical
};

/// Latitude and longitude entries sharing a description prefix are paired in
/// order of appearance. Each half also stands alone and may match the
/// corresponding component of a captured location.
[[nodiscard]] LocationValues pair_location(const std::vector<ExtractedValue>& entries, const DescriptorDictionary& dict,
                                           const CanonicalOptions& opts = {});

[[nodiscard]] AppCompletenessResult compare(const CapturedProfile& profile, const CategoryExtraction& extraction,
                                            const DescriptorDictionary& dict = default_descriptor_dictionary(),
                                            const CompareOptions& opts = {});

struct CategoryConsistency {
    DataCategory category = DataCategory::IPAddress;
    long long matched = 0;
    long long collected = 0;  // apps where the category is not NotCollected
};

/// One row per category, in category order.
[[nodiscard]] std::vector<CategoryConsistency> aggregate_consistency(const std::vector<AppCompletenessResult>& results);

struct MissingRateHistogram {
    double low_threshold = 0.4;
    double high_threshold = 0.8;
    long long complete = 0;  // rate == 0
    long long low = 0;       // (0, low]
    long long mid = 0;       // (low, high]
    long long high = 0;      // > high
    long long undefined = 0;

    [[nodiscard]] long long defined() const { return complete + low + mid + high; }
    [[nodiscard]] long long exceeding_low() const { return mid + high; }
    [[nodiscard]] long long exceeding_high() const { return high; }
};

[[nodiscard]] MissingRateHistogram missing_rate_histogram(const std::vector<AppCompletenessResult>& results,
                                                          double low_threshold = 0.4, double high_threshold = 0.8);

[[nodiscard]] std::string result_to_json(const AppCompletenessResult& r);
[[nodiscard]] AppCompletenessResult result_from_json(std::string_view text);

}  // namespace rads
