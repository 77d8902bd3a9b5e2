#include "oracles.hpp"
#include "support.hpp"

#include "rads/error.hpp"
#include "rads/ledger.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>
#include <sys/wait.h>
#include <unistd.h>

using namespace rads;
using namespace std::chrono;

namespace {

const Timestamp t0 = parse_timestamp("2024-03-01T09:00:00Z");

AccessRequest answered(milliseconds delta, bool immediate = false) {
    AccessRequest r;
    r.opened_at = t0;
    r.feedback_at = t0 + delta;
    r.outcome = Outcome::ObtainDataCopy;
    r.immediate_view = immediate;
    return r;
}

FeedbackBucket to_bucket(oracle::Bucket b) {
    switch (b) {
        case oracle::Bucket::Immediate: return FeedbackBucket::ImmediateView;
        case oracle::Bucket::OneDay: return FeedbackBucket::WithinOneDay;
        case oracle::Bucket::ThreeDays: return FeedbackBucket::TwoToThreeDays;
        case oracle::Bucket::SevenDays: return FeedbackBucket::FourToSevenDays;
        case oracle::Bucket::Over: return FeedbackBucket::OverSevenDays;
        case oracle::Bucket::None: return FeedbackBucket::NoFeedback;
    }
    return FeedbackBucket::NoFeedback;
}

}  // namespace

TEST_SUITE("ledger") {

TEST_CASE("opening requests") {
    Ledger ledger;
    const auto a = ledger.open_request("appA", MethodKind::EmailContact, RightRequested::ObtainCopy, t0);
    CHECK_FALSE(a.terminal());
    CHECK(a.request_id == "req-000001");
    CHECK_THROWS_AS(ledger.open_request("appA", MethodKind::EmailContact, RightRequested::ObtainCopy, t0), DataError);
    const auto b = ledger.open_request("appB", MethodKind::WebformSubmission, RightRequested::ViewInformation, t0);
    CHECK(b.request_id != a.request_id);
    CHECK_NOTHROW(ledger.open_request("appA", MethodKind::EmailContact, RightRequested::ViewInformation, t0));
    CHECK(ledger.requests().size() == 3);
}

TEST_CASE("recording feedback") {
    Ledger ledger;
    const auto a = ledger.open_request("appA", MethodKind::EmailContact, RightRequested::ObtainCopy, t0);
    const auto done = ledger.record_feedback(a.request_id, t0 + hours(5), Outcome::ObtainDataCopy);
    CHECK(done.terminal());
    CHECK(*done.feedback_at - done.opened_at == hours(5));

    const auto b = ledger.open_request("appB", MethodKind::EmailContact, RightRequested::ObtainCopy, t0);
    CHECK_THROWS_AS(ledger.record_feedback(b.request_id, t0 - seconds(1), Outcome::Failure), DataError);
    const auto failed = ledger.record_feedback(b.request_id, t0 + days(30), Outcome::Failure, "no reply after 30 days");
    CHECK(failed.outcome == Outcome::Failure);
    CHECK(failed.notes == "no reply after 30 days");

    CHECK_THROWS_AS(ledger.record_feedback("req-999999", t0, Outcome::Failure), DataError);
    CHECK_THROWS_AS(ledger.record_feedback(a.request_id, t0 + hours(6), Outcome::Failure), DataError);
    CHECK(ledger.requests()[0].outcome == Outcome::ObtainDataCopy);
    CHECK_NOTHROW(ledger.open_request("appA", MethodKind::EmailContact, RightRequested::ObtainCopy, t0 + days(1)));
}

TEST_CASE("ui depth records") {
    Ledger ledger;
    CHECK(ledger.record_ui_depth("a", 3, t0).depth == 3);
    CHECK_THROWS_AS(ledger.record_ui_depth("a", 7, t0), DataError);
    CHECK_THROWS_AS(ledger.record_ui_depth("a", 1, t0), DataError);
    CHECK_NOTHROW(ledger.record_ui_depth("b", std::nullopt, t0));
    ledger.record_ui_depth("a", 4, t0 + hours(1));
    CHECK(ledger.ui_depths().at("a").depth == 4);

    std::map<std::string, UiDepthRecord> depths;
    for (int i = 0; i < 196; ++i) {
        const std::optional<int> d = i < 130 ? std::optional<int>(3) : (i < 190 ? std::optional<int>(2 + i % 4) : std::nullopt);
        depths["app" + std::to_string(i)] = {"app" + std::to_string(i), d, t0};
    }
    const auto hist = ui_depth_histogram(depths);
    CHECK(hist.size() == 5);
    long long total = 0;
    for (const auto& [k, v] : hist) total += v;
    CHECK(total == 196);
    CHECK(hist.at(3) >= 130);
    CHECK(oracle::percent(130, 196) == doctest::Approx(66.33));
}

TEST_CASE("corpus membership is enforced") {
    Ledger ledger({}, std::set<std::string>{"appA"});
    CHECK_NOTHROW(ledger.open_request("appA", MethodKind::EmailContact, RightRequested::ObtainCopy, t0));
    CHECK_THROWS_AS(ledger.open_request("ghost", MethodKind::EmailContact, RightRequested::ObtainCopy, t0), DataError);
    CHECK_THROWS_AS(ledger.record_ui_depth("ghost", 3, t0), DataError);
}

TEST_CASE("the file is an append-only replayable log") {
    test::TempDir dir;
    const auto path = dir / "ledger.jsonl";
    {
        Ledger ledger(path);
        const auto a = ledger.open_request("appA", MethodKind::EmailContact, RightRequested::ObtainCopy, t0, "sent");
        ledger.record_feedback(a.request_id, t0 + hours(30), Outcome::ViewInformation);
        ledger.record_ui_depth("appA", std::nullopt, t0);
    }
    const auto text = read_file(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
    CHECK(first["kind"] == "open");
    CHECK(first["method"] == "EmailContact");
    CHECK(first["right"] == "ObtainCopy");
    CHECK(first["opened_at"] == "2024-03-01T09:00:00Z");

    Ledger reread(path);
    REQUIRE(reread.requests().size() == 1);
    CHECK(reread.requests()[0].outcome == Outcome::ViewInformation);
    CHECK(reread.requests()[0].notes == "sent");
    CHECK_FALSE(reread.ui_depths().at("appA").depth.has_value());

    // A second writer sees the first writer's appends before validating.
    Ledger other(path);
    reread.open_request("appB", MethodKind::AccountSettings, RightRequested::ViewInformation, t0);
    CHECK_THROWS_AS(other.open_request("appB", MethodKind::AccountSettings, RightRequested::ViewInformation, t0),
                    DataError);
    CHECK(other.requests().size() == 2);
}

TEST_CASE("concurrent writers never lose or duplicate a line") {
    test::TempDir dir;
    const auto path = dir / "ledger.jsonl";
    std::vector<pid_t> kids;
    for (int w = 0; w < 4; ++w) {
        const pid_t pid = ::fork();
        if (pid == 0) {
            int rc = 0;
            try {
                Ledger ledger(path);
                for (int i = 0; i < 10; ++i) {
                    ledger.open_request("app" + std::to_string(w) + "_" + std::to_string(i), MethodKind::EmailContact,
                                        RightRequested::ObtainCopy, t0);
                }
            } catch (...) {
                rc = 1;
            }
            ::_exit(rc);
        }
        kids.push_back(pid);
    }
    for (auto pid : kids) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        CHECK(WIFEXITED(status));
        CHECK(WEXITSTATUS(status) == 0);
    }
    Ledger all(path);
    CHECK(all.requests().size() == 40);
    std::set<std::string> ids;
    for (const auto& r : all.requests()) ids.insert(r.request_id);
    CHECK(ids.size() == 40);
}

TEST_CASE("corrupt ledger lines are data errors") {
    test::TempDir dir;
    CHECK_THROWS_AS(Ledger(dir.write("bad.jsonl", "{\"kind\": \"open\"}\n")), DataError);
    CHECK_THROWS_AS(Ledger(dir.write("junk.jsonl", "not json\n")), DataError);
}

TEST_CASE("bucket boundaries") {
    const auto horizon = t0 + days(60);
    CHECK(bucket_duration(answered(hours(24)), horizon, false) == FeedbackBucket::WithinOneDay);
    CHECK(bucket_duration(answered(hours(24) + seconds(1)), horizon, false) == FeedbackBucket::TwoToThreeDays);
    CHECK(bucket_duration(answered(hours(50)), horizon, false) == FeedbackBucket::TwoToThreeDays);
    CHECK(bucket_duration(answered(hours(72)), horizon, false) == FeedbackBucket::TwoToThreeDays);
    CHECK(bucket_duration(answered(hours(72) + seconds(1)), horizon, false) == FeedbackBucket::FourToSevenDays);
    CHECK(bucket_duration(answered(hours(168)), horizon, false) == FeedbackBucket::FourToSevenDays);
    CHECK(bucket_duration(answered(hours(168) + seconds(1)), horizon, false) == FeedbackBucket::OverSevenDays);
    CHECK(bucket_duration(answered(milliseconds(0)), horizon, false) == FeedbackBucket::WithinOneDay);
    CHECK(bucket_duration(answered(hours(3)), horizon, true) == FeedbackBucket::ImmediateView);

    AccessRequest pending;
    pending.opened_at = t0;
    CHECK(bucket_duration(pending, horizon, false) == FeedbackBucket::NoFeedback);
    CHECK(bucket_duration(answered(hours(100)), t0 + hours(99), false) == FeedbackBucket::NoFeedback);

    BucketBounds calendar;
    calendar.one_day = hours(30);
    CHECK(bucket_duration(answered(hours(28)), horizon, false, calendar) == FeedbackBucket::WithinOneDay);
}

TEST_CASE("buckets partition random durations") {
    std::mt19937_64 rng(89);
    std::map<FeedbackBucket, int> seen;
    for (int i = 0; i < 10000; ++i) {
        const bool pending = rng() % 10 == 0;
        const bool immediate = rng() % 10 == 0;
        const auto delta = milliseconds(static_cast<long long>(rng() % (400ULL * 3600 * 1000)));
        const auto horizon = t0 + milliseconds(static_cast<long long>(rng() % (400ULL * 3600 * 1000)));
        AccessRequest r;
        r.opened_at = t0;
        if (!pending) {
            r.feedback_at = t0 + delta;
            r.outcome = Outcome::Failure;
        }
        const auto got = bucket_duration(r, horizon, immediate);
        const auto want = oracle::bucket(immediate, pending ? std::nullopt : std::optional(delta), t0 + delta > horizon);
        REQUIRE(got == to_bucket(want));
        ++seen[got];
    }
    CHECK(seen.size() == 6);
}

TEST_CASE("authenticity keeps the best outcome per app and method") {
    Ledger ledger;
    for (int i = 0; i < 107; ++i) {
        const auto r = ledger.open_request("app" + std::to_string(i), MethodKind::EmailContact, RightRequested::ObtainCopy, t0);
        const auto outcome = i < 81 ? Outcome::Failure : (i < 89 ? Outcome::ViewInformation : Outcome::ObtainDataCopy);
        ledger.record_feedback(r.request_id, t0 + hours(1), outcome);
    }
    const auto again = ledger.open_request("app0", MethodKind::EmailContact, RightRequested::ObtainCopy, t0 + hours(2));
    ledger.record_feedback(again.request_id, t0 + hours(3), Outcome::ObtainDataCopy);
    ledger.open_request("pending", MethodKind::EmailContact, RightRequested::ObtainCopy, t0);

    const auto rows = authenticity_summary(ledger.requests());
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].method == MethodKind::EmailContact);
    CHECK(rows[0].failure == 80);
    CHECK(rows[0].view == 8);
    CHECK(rows[0].copy == 19);
    CHECK(rows[1].total() == 0);
}

TEST_CASE("feedback histogram counts every request once") {
    Ledger ledger;
    const auto a = ledger.open_request("a", MethodKind::AccountSettings, RightRequested::ViewInformation, t0);
    ledger.record_feedback(a.request_id, t0, Outcome::ViewInformation, {}, true);
    const auto b = ledger.open_request("b", MethodKind::EmailContact, RightRequested::ObtainCopy, t0);
    ledger.record_feedback(b.request_id, t0 + hours(80), Outcome::ObtainDataCopy);
    ledger.open_request("c", MethodKind::EmailContact, RightRequested::ObtainCopy, t0);
    const auto hist = feedback_histogram(ledger.requests(), t0 + days(30));
    CHECK(hist.size() == 6);
    CHECK(hist.at(FeedbackBucket::ImmediateView) == 1);
    CHECK(hist.at(FeedbackBucket::FourToSevenDays) == 1);
    CHECK(hist.at(FeedbackBucket::NoFeedback) == 1);
    CHECK(hist.at(FeedbackBucket::WithinOneDay) == 0);
}

TEST_CASE("enum spellings") {
    CHECK(parse_outcome("copy") == Outcome::ObtainDataCopy);
    CHECK(parse_outcome("Failure") == Outcome::Failure);
    CHECK(parse_right_requested("view") == RightRequested::ViewInformation);
    CHECK_FALSE(parse_outcome("maybe").has_value());
    for (auto b : all_feedback_buckets) CHECK_FALSE(to_string(b).empty());
}

}
