#pragma once

// Deliberately naive reference implementations the library is checked against.

#include "rads/rights_identifier.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rads::oracle {

struct Confusion {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Pairs findings by app id with a linear scan and tallies one binary target.
inline Confusion confusion(const std::vector<RadsFinding>& predicted, const std::vector<RadsFinding>& labeled,
                           const std::function<bool(const RadsFinding&)>& positive) {
    Confusion c;
    for (const auto& gold : labeled) {
        const RadsFinding* pred = nullptr;
        for (const auto& p : predicted) {
            if (p.app_id == gold.app_id) pred = &p;
        }
        const bool y = positive(gold);
        const bool yhat = positive(*pred);
        if (y && yhat) ++c.tp;
        else if (!y && yhat) ++c.fp;
        else if (y && !yhat) ++c.fn;
        else ++c.tn;
    }
    return c;
}

inline std::vector<std::pair<std::string, std::function<bool(const RadsFinding&)>>> targets() {
    auto has = [](MethodKind m) {
        return [m](const RadsFinding& f) { return f.methods.count(m) > 0; };
    };
    return {
        {"VDAR", [](const RadsFinding& f) { return f.rights_class == RightsClass::VDAR; }},
        {"DCAR", [](const RadsFinding& f) { return f.rights_class == RightsClass::DCAR; }},
        {"EmailContact", has(MethodKind::EmailContact)},
        {"AccountSettings", has(MethodKind::AccountSettings)},
        {"WebformSubmission", has(MethodKind::WebformSubmission)},
    };
}

/// Percentage to two decimals, half up, through long double arithmetic.
inline long long hundredths(long long count, long long denominator) {
    const long double x = static_cast<long double>(count) * 10000.0L / static_cast<long double>(denominator);
    return static_cast<long long>(std::floor(x + 0.5L));
}

inline double percent(long long count, long long denominator) {
    return static_cast<double>(hundredths(count, denominator)) / 100.0;
}

/// Non-null scalar leaves of a JSON document.
inline std::size_t count_leaves(const nlohmann::ordered_json& j) {
    if (j.is_null()) return 0;
    if (!j.is_structured()) return 1;
    std::size_t n = 0;
    for (const auto& child : j) n += count_leaves(child);
    return n;
}

/// Follows a list of path segments (object keys or decimal array indices).
inline const nlohmann::ordered_json* walk(const nlohmann::ordered_json& root, const std::vector<std::string>& path) {
    const nlohmann::ordered_json* cur = &root;
    for (const auto& seg : path) {
        if (cur->is_object()) {
            const auto it = cur->find(seg);
            if (it == cur->end()) return nullptr;
            cur = &*it;
        } else if (cur->is_array()) {
            if (seg.empty() || seg.find_first_not_of("0123456789") != std::string::npos) return nullptr;
            const auto i = std::stoul(seg);
            if (i >= cur->size()) return nullptr;
            cur = &(*cur)[i];
        } else {
            return nullptr;
        }
    }
    return cur;
}

enum class Bucket { Immediate, OneDay, ThreeDays, SevenDays, Over, None };

/// Feedback timing read straight off the stated inequalities.
inline Bucket bucket(bool immediate, std::optional<std::chrono::milliseconds> delta, bool after_horizon) {
    using namespace std::chrono;
    if (immediate) return Bucket::Immediate;
    if (!delta || after_horizon) return Bucket::None;
    if (*delta <= hours(24)) return Bucket::OneDay;
    if (*delta > hours(24) && *delta <= hours(72)) return Bucket::ThreeDays;
    if (*delta > hours(72) && *delta <= hours(168)) return Bucket::SevenDays;
    return Bucket::Over;
}

}  // namespace rads::oracle
