#pragma once

#include "rads/completeness.hpp"
#include "rads/ledger.hpp"
#include "rads/rights_identifier.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rads {

/// A count over a denominator; the percentage is derived, never stored.
struct Proportion {
    long long count = 0;
    long long denominator = 0;

    [[nodiscard]] bool defined() const { return denominator > 0; }
    /// Hundredths of a percent, rounded half-up. Only meaningful when defined().
    [[nodiscard]] long long hundredths() const { return defined() ? percent_hundredths(count, denominator) : 0; }
    /// "54.50% (327/600)", or "n/a (0/0)" when the denominator is zero.
    [[nodiscard]] std::string text() const;

    friend bool operator==(const Proportion&, const Proportion&) = default;
};

struct RadsProportions {
    long long total = 0;
    Proportion vdar, dcar, none;

    friend bool operator==(const RadsProportions&, const RadsProportions&) = default;
};

struct MethodProportions {
    long long denominator = 0;  // apps declaring an access right
    std::map<MethodKind, Proportion> per_method;

    friend bool operator==(const MethodProportions&, const MethodProportions&) = default;
};

[[nodiscard]] RadsProportions aggregate_rads(const std::vector<RadsFinding>& findings);
[[nodiscard]] MethodProportions aggregate_methods(const std::vector<RadsFinding>& findings);

struct ComplianceReport {
    std::string market_id;
    RadsProportions rads;
    MethodProportions methods;
    std::vector<AuthenticityRow> authenticity;
    std::optional<Timestamp> feedback_horizon;
    std::map<FeedbackBucket, long long> feedback;
    std::map<std::optional<int>, long long> ui_depth;
    std::vector<CategoryConsistency> consistency;
    MissingRateHistogram missing_rate;
    std::vector<std::string> notes;
};

/// Zeroed tables for every section.
[[nodiscard]] ComplianceReport empty_report(const std::string& market_id);

enum class ReportFormat { Json, Markdown };

[[nodiscard]] std::optional<ReportFormat> parse_report_format(std::string_view s);

/// Deterministic: the same report always serializes to the same bytes.
[[nodiscard]] std::string emit_report(const ComplianceReport& report, ReportFormat format);
/// Reads the JSON emission back.
[[nodiscard]] ComplianceReport report_from_json(std::string_view text);

}  // namespace rads
