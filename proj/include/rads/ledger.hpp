#pragma once

#include "rads/domain.hpp"
#include "rads/util.hpp"

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rads {

enum class RightRequested { ViewInformation, ObtainCopy };
enum class Outcome { Failure, ViewInformation, ObtainDataCopy };  // ordered worst to best
enum class FeedbackBucket { ImmediateView, WithinOneDay, TwoToThreeDays, FourToSevenDays, OverSevenDays, NoFeedback };

inline constexpr std::array<FeedbackBucket, 6> all_feedback_buckets{
    FeedbackBucket::ImmediateView,   FeedbackBucket::WithinOneDay,  FeedbackBucket::TwoToThreeDays,
    FeedbackBucket::FourToSevenDays, FeedbackBucket::OverSevenDays, FeedbackBucket::NoFeedback};

[[nodiscard]] std::string_view to_string(RightRequested r);
[[nodiscard]] std::string_view to_string(Outcome o);
[[nodiscard]] std::string_view to_string(FeedbackBucket b);
[[nodiscard]] std::optional<RightRequested> parse_right_requested(std::string_view s);
[[nodiscard]] std::optional<Outcome> parse_outcome(std::string_view s);

struct AccessRequest {
    std::string request_id;
    std::string app_id;
    MethodKind method = MethodKind::EmailContact;
    RightRequested right = RightRequested::ObtainCopy;
    Timestamp opened_at{};
    std::optional<Timestamp> feedback_at;
    std::optional<Outcome> outcome;
    bool immediate_view = false;
    std::string notes;

    [[nodiscard]] bool terminal() const { return outcome.has_value(); }
    friend bool operator==(const AccessRequest&, const AccessRequest&) = default;
};

struct UiDepthRecord {
    std::string app_id;
    std::optional<int> depth;  // nullopt means the setting was not found
    Timestamp recorded_at{};

    friend bool operator==(const UiDepthRecord&, const UiDepthRecord&) = default;
};

inline constexpr int min_ui_depth = 2;
inline constexpr int max_ui_depth = 5;

/// Upper bounds (inclusive) of the three shorter duration buckets.
struct BucketBounds {
    std::chrono::milliseconds one_day = std::chrono::hours(24);
    std::chrono::milliseconds three_days = std::chrono::hours(72);
    std::chrono::milliseconds seven_days = std::chrono::hours(168);
};

/// Total: every request maps to exactly one bucket. Feedback later than the
/// horizon counts as no feedback.
[[nodiscard]] FeedbackBucket bucket_duration(const AccessRequest& req, Timestamp horizon, bool immediate_view,
                                             const BucketBounds& bounds = {});

/// Append-only JSON-lines ledger. Every mutation re-reads the file under an
/// exclusive advisory lock, validates against the replayed state and appends
/// one line. An empty path keeps the ledger in memory.
class Ledger {
public:
    explicit Ledger(std::filesystem::path path = {}, std::optional<std::set<std::string>> corpus = std::nullopt);

    AccessRequest open_request(const std::string& app_id, MethodKind method, RightRequested right,
                               Timestamp opened_at, const std::string& notes = {});
    AccessRequest record_feedback(const std::string& request_id, Timestamp feedback_at, Outcome outcome,
                                  const std::string& notes = {}, bool immediate_view = false);
    UiDepthRecord record_ui_depth(const std::string& app_id, std::optional<int> depth, Timestamp recorded_at);

    [[nodiscard]] const std::vector<AccessRequest>& requests() const { return requests_; }
    /// Latest record per app.
    [[nodiscard]] const std::map<std::string, UiDepthRecord>& ui_depths() const { return ui_depths_; }

    void reload();

private:
    void replay(const std::string& text);
    void apply(const std::string& line, std::size_t line_no);
    template <class Fn>
    auto mutate(Fn&& fn);

    std::filesystem::path path_;
    std::optional<std::set<std::string>> corpus_;
    std::vector<AccessRequest> requests_;
    std::map<std::string, std::size_t> by_id_;
    std::map<std::string, UiDepthRecord> ui_depths_;
};

struct AuthenticityRow {
    MethodKind method = MethodKind::EmailContact;
    long long failure = 0;
    long long view = 0;
    long long copy = 0;

    [[nodiscard]] long long total() const { return failure + view + copy; }
};

/// Best outcome per (app, method) over terminal requests; one row per method.
[[nodiscard]] std::vector<AuthenticityRow> authenticity_summary(const std::vector<AccessRequest>& requests);

[[nodiscard]] std::map<FeedbackBucket, long long> feedback_histogram(const std::vector<AccessRequest>& requests,
                                                                     Timestamp horizon,
                                                                     const BucketBounds& bounds = {});

/// Keys 2..5 and nullopt for NotFound; every key present.
[[nodiscard]] std::map<std::optional<int>, long long> ui_depth_histogram(
    const std::map<std::string, UiDepthRecord>& depths);

}  // namespace rads
