#include "rads/completeness.hpp"

#include "rads/error.hpp"
#include "rads/util.hpp"

#include <json.hpp>

#include <arpa/inet.h>

namespace rads {

using json = nlohmann::json;

std::string_view to_string(ConsistencyStatus s) {
    switch (s) {
        case ConsistencyStatus::NotCollected: return "NotCollected";
        case ConsistencyStatus::MatchedConsistent: return "MatchedConsistent";
        case ConsistencyStatus::PresentButMismatch: return "PresentButMismatch";
        case ConsistencyStatus::AbsentFromCopy: return "AbsentFromCopy";
    }
    return "?";
}

std::optional<ConsistencyStatus> parse_consistency_status(std::string_view s) {
    for (auto v : {ConsistencyStatus::NotCollected, ConsistencyStatus::MatchedConsistent,
                   ConsistencyStatus::PresentButMismatch, ConsistencyStatus::AbsentFromCopy}) {
        if (iequals(s, to_string(v))) return v;
    }
    return std::nullopt;
}

namespace {

std::string prefix_of(const std::string& description) {
    auto segs = split_description(description);
    segs.pop_back();
    std::string out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (i) out += '.';
        out += escape_key_segment(segs[i]);
    }
    return out;
}

std::optional<std::string> ipv4_prefix24(const std::string& ip) {
    in_addr a{};
    if (inet_pton(AF_INET, ip.c_str(), &a) != 1) return std::nullopt;
    return ip.substr(0, ip.rfind('.'));
}

bool location_matches(const std::string& captured, const LocationValues& lv) {
    if (lv.full.count(captured)) return true;
    const auto comma = captured.find(',');
    if (comma == std::string::npos) return false;
    return lv.latitudes.count(captured.substr(0, comma)) > 0 || lv.longitudes.count(captured.substr(comma + 1)) > 0;
}

}  // namespace

LocationValues pair_location(const std::vector<ExtractedValue>& entries, const DescriptorDictionary& dict,
                             const CanonicalOptions& opts) {
    LocationValues out;
    std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> halves;
    for (const auto& e : entries) {
        const bool lat = dict.is_latitude(e.description);
        const bool lon = dict.is_longitude(e.description);
        if (lat != lon) {
            const auto c = canonical_coordinate(e.value, opts);
            if (!c) continue;
            auto& slot = halves[prefix_of(e.description)];
            (lat ? slot.first : slot.second).push_back(*c);
            (lat ? out.latitudes : out.longitudes).insert(*c);
            continue;
        }
        try {
            out.full.insert(canonicalize(DataCategory::Location, e.value, opts));
        } catch (const DataError&) {
            // free-text place names cannot be compared
        }
    }
    for (const auto& [prefix, lists] : halves) {
        const auto n = std::min(lists.first.size(), lists.second.size());
        for (std::size_t i = 0; i < n; ++i) {
            try {
                out.full.insert(canonicalize(DataCategory::Location, lists.first[i] + "," + lists.second[i], opts));
            } catch (const DataError&) {
                // a longitude beyond +-90 read as latitude, for instance
            }
        }
    }
    return out;
}

AppCompletenessResult compare(const CapturedProfile& profile, const CategoryExtraction& extraction,
                              const DescriptorDictionary& dict, const CompareOptions& opts) {
    AppCompletenessResult r;
    r.app_id = profile.app_id;
    for (auto c : all_data_categories) {
        const auto pit = profile.values.find(c);
        if (pit == profile.values.end()) {
            r.per_category[c] = ConsistencyStatus::NotCollected;
            continue;
        }
        ++r.collected;
        const auto eit = extraction.find(c);
        if (eit == extraction.end() || eit->second.empty()) {
            r.per_category[c] = ConsistencyStatus::AbsentFromCopy;
            ++r.missing;
            continue;
        }
        const auto& captured = pit->second;
        bool matched = false;
        if (c == DataCategory::Location) {
            const auto lv = pair_location(eit->second, dict, opts.canonical);
            for (const auto& v : captured) matched = matched || location_matches(v, lv);
        } else {
            for (const auto& ev : eit->second) {
                std::string value;
                try {
                    value = canonicalize(c, ev.value, opts.canonical);
                } catch (const DataError&) {
                    value = std::string(trim(ev.value));
                }
                if (captured.count(value)) {
                    matched = true;
                } else if (c == DataCategory::IPAddress && opts.lenient_ip) {
                    const auto p = ipv4_prefix24(value);
                    for (const auto& v : captured) matched = matched || (p && ipv4_prefix24(v) == p);
                }
                if (matched) break;
            }
        }
        r.per_category[c] = matched ? ConsistencyStatus::MatchedConsistent : ConsistencyStatus::PresentButMismatch;
        if (!matched) ++r.missing;
    }
    r.no_collection = r.collected == 0;
    if (!r.no_collection) r.missing_rate = static_cast<double>(r.missing) / r.collected;
    return r;
}

std::vector<CategoryConsistency> aggregate_consistency(const std::vector<AppCompletenessResult>& results) {
    std::vector<CategoryConsistency> rows;
    for (auto c : all_data_categories) {
        CategoryConsistency row{c, 0, 0};
        for (const auto& r : results) {
            const auto it = r.per_category.find(c);
            if (it == r.per_category.end() || it->second == ConsistencyStatus::NotCollected) continue;
            ++row.collected;
            if (it->second == ConsistencyStatus::MatchedConsistent) ++row.matched;
        }
        rows.push_back(row);
    }
    return rows;
}

MissingRateHistogram missing_rate_histogram(const std::vector<AppCompletenessResult>& results, double low_threshold,
                                            double high_threshold) {
    if (!(0.0 <= low_threshold && low_threshold <= high_threshold && high_threshold <= 1.0))
        throw UsageError("missing-rate thresholds must satisfy 0 <= low <= high <= 1");
    MissingRateHistogram h;
    h.low_threshold = low_threshold;
    h.high_threshold = high_threshold;
    for (const auto& r : results) {
        if (!r.missing_rate) ++h.undefined;
        else if (*r.missing_rate == 0.0) ++h.complete;
        else if (*r.missing_rate <= low_threshold) ++h.low;
        else if (*r.missing_rate <= high_threshold) ++h.mid;
        else ++h.high;
    }
    return h;
}

std::string result_to_json(const AppCompletenessResult& r) {
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (const auto& [c, s] : r.per_category) per[std::string(to_string(c))] = to_string(s);
    nlohmann::ordered_json flags = nlohmann::ordered_json::array();
    if (r.no_collection) flags.push_back("no collection observed");
    nlohmann::ordered_json doc = {
        {"app_id", r.app_id},
        {"per_category", per},
        {"collected", r.collected},
        {"missing", r.missing},
        {"missing_rate", r.missing_rate ? nlohmann::ordered_json(*r.missing_rate) : nlohmann::ordered_json(nullptr)},
        {"flags", flags},
    };
    return doc.dump(2) + "\n";
}

AppCompletenessResult result_from_json(std::string_view text) {
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("result must be a JSON object");
    AppCompletenessResult r;
    try {
        r.app_id = doc.at("app_id").get<std::string>();
        for (const auto& [name, status] : doc.at("per_category").items()) {
            const auto c = parse_data_category(name);
            const auto s = parse_consistency_status(status.get<std::string>());
            if (!c || !s) throw DataError("bad per_category entry '" + name + "' in result for " + r.app_id);
            r.per_category[*c] = *s;
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed result: ") + e.what());
    }
    for (auto c : all_data_categories) {
        const auto it = r.per_category.find(c);
        if (it == r.per_category.end()) {
            r.per_category[c] = ConsistencyStatus::NotCollected;
            continue;
        }
        if (it->second == ConsistencyStatus::NotCollected) continue;
        ++r.collected;
        if (it->second != ConsistencyStatus::MatchedConsistent) ++r.missing;
    }
    r.no_collection = r.collected == 0;
    if (!r.no_collection) r.missing_rate = static_cast<double>(r.missing) / r.collected;
    return r;
}

}  // namespace rads
