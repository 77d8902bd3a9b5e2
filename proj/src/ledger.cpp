#include "rads/ledger.hpp"

#include "rads/error.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>

namespace rads {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(RightRequested r) {
    return r == RightRequested::ViewInformation ? "ViewInformation" : "ObtainCopy";
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Failure: return "Failure";
        case Outcome::ViewInformation: return "ViewInformation";
        case Outcome::ObtainDataCopy: return "ObtainDataCopy";
    }
    return "?";
}

std::string_view to_string(FeedbackBucket b) {
    switch (b) {
        case FeedbackBucket::ImmediateView: return "ImmediateView";
        case FeedbackBucket::WithinOneDay: return "WithinOneDay";
        case FeedbackBucket::TwoToThreeDays: return "TwoToThreeDays";
        case FeedbackBucket::FourToSevenDays: return "FourToSevenDays";
        case FeedbackBucket::OverSevenDays: return "OverSevenDays";
        case FeedbackBucket::NoFeedback: return "NoFeedback";
    }
    return "?";
}

std::optional<RightRequested> parse_right_requested(std::string_view s) {
    const auto l = to_lower(trim(s));
    if (l == "viewinformation" || l == "view") return RightRequested::ViewInformation;
    if (l == "obtaincopy" || l == "copy") return RightRequested::ObtainCopy;
    return std::nullopt;
}

std::optional<Outcome> parse_outcome(std::string_view s) {
    const auto l = to_lower(trim(s));
    if (l == "failure" || l == "fail") return Outcome::Failure;
    if (l == "viewinformation" || l == "view") return Outcome::ViewInformation;
    if (l == "obtaindatacopy" || l == "copy") return Outcome::ObtainDataCopy;
    return std::nullopt;
}

FeedbackBucket bucket_duration(const AccessRequest& req, Timestamp horizon, bool immediate_view,
                               const BucketBounds& bounds) {
    if (immediate_view) return FeedbackBucket::ImmediateView;
    if (!req.feedback_at || *req.feedback_at > horizon) return FeedbackBucket::NoFeedback;
    const auto delta = *req.feedback_at - req.opened_at;
    if (delta <= bounds.one_day) return FeedbackBucket::WithinOneDay;
    if (delta <= bounds.three_days) return FeedbackBucket::TwoToThreeDays;
    if (delta <= bounds.seven_days) return FeedbackBucket::FourToSevenDays;
    return FeedbackBucket::OverSevenDays;
}

// ---------------------------------------------------------------------------
// Ledger

namespace {

class LockedFile {
public:
    explicit LockedFile(const std::filesystem::path& path) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (fd_ < 0) throw DataError("cannot open ledger " + path.string() + ": " + std::strerror(errno));
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw DataError("cannot lock ledger " + path.string() + ": " + std::strerror(errno));
        }
    }
    ~LockedFile() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    LockedFile(const LockedFile&) = delete;
    LockedFile& operator=(const LockedFile&) = delete;

    std::string read_all() const {
        std::string out;
        char buf[8192];
        ::lseek(fd_, 0, SEEK_SET);
        for (;;) {
            const auto n = ::read(fd_, buf, sizeof buf);
            if (n < 0) throw DataError(std::string("cannot read ledger: ") + std::strerror(errno));
            if (n == 0) break;
            out.append(buf, static_cast<std::size_t>(n));
        }
        return out;
    }

    void append(const std::string& line) const {
        std::size_t done = 0;
        while (done < line.size()) {
            const auto n = ::write(fd_, line.data() + done, line.size() - done);
            if (n < 0) throw DataError(std::string("cannot append to ledger: ") + std::strerror(errno));
            done += static_cast<std::size_t>(n);
        }
        ::fsync(fd_);
    }

private:
    int fd_ = -1;
};

std::string format_request_id(std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "req-%06zu", n);
    return buf;
}

}  // namespace

Ledger::Ledger(std::filesystem::path path, std::optional<std::set<std::string>> corpus)
    : path_(std::move(path)), corpus_(std::move(corpus)) {
    reload();
}

void Ledger::reload() {
    requests_.clear();
    by_id_.clear();
    ui_depths_.clear();
    if (path_.empty() || !std::filesystem::exists(path_)) return;
    replay(read_file(path_));
}

void Ledger::replay(const std::string& text) {
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        const auto line = text.substr(pos, end - pos);
        if (!trim(line).empty()) apply(line, line_no);
        pos = end + 1;
    }
}

void Ledger::apply(const std::string& line, std::size_t line_no) {
    const auto where = "ledger line " + std::to_string(line_no) + ": ";
    const auto rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) throw DataError(where + "not a JSON object");
    try {
        const auto kind = rec.at("kind").get<std::string>();
        if (kind == "open") {
            AccessRequest r;
            r.request_id = rec.at("request_id").get<std::string>();
            r.app_id = rec.at("app_id").get<std::string>();
            const auto m = parse_method(rec.at("method").get<std::string>());
            const auto right = parse_right_requested(rec.at("right").get<std::string>());
            if (!m || !right) throw DataError(where + "bad method or right");
            r.method = *m;
            r.right = *right;
            r.opened_at = parse_timestamp(rec.at("opened_at").get<std::string>());
            r.notes = rec.value("notes", std::string());
            if (by_id_.count(r.request_id)) throw DataError(where + "duplicate request id " + r.request_id);
            by_id_[r.request_id] = requests_.size();
            requests_.push_back(std::move(r));
        } else if (kind == "feedback") {
            const auto id = rec.at("request_id").get<std::string>();
            const auto it = by_id_.find(id);
            if (it == by_id_.end()) throw DataError(where + "feedback for unknown request " + id);
            auto& r = requests_[it->second];
            if (r.terminal()) throw DataError(where + "second feedback for terminal request " + id);
            const auto outcome = parse_outcome(rec.at("outcome").get<std::string>());
            if (!outcome) throw DataError(where + "bad outcome");
            const auto at = parse_timestamp(rec.at("feedback_at").get<std::string>());
            if (at < r.opened_at) throw DataError(where + "feedback precedes opening of " + id);
            r.feedback_at = at;
            r.outcome = *outcome;
            r.immediate_view = rec.value("immediate_view", false);
            const auto notes = rec.value("notes", std::string());
            if (!notes.empty()) r.notes = r.notes.empty() ? notes : r.notes + "; " + notes;
        } else if (kind == "ui_depth") {
            UiDepthRecord u;
            u.app_id = rec.at("app_id").get<std::string>();
            const auto& d = rec.at("depth");
            if (d.is_number_integer()) {
                u.depth = d.get<int>();
                if (*u.depth < min_ui_depth || *u.depth > max_ui_depth) throw DataError(where + "depth out of range");
            } else if (!(d.is_string() && d.get<std::string>() == "NotFound")) {
                throw DataError(where + "depth must be 2..5 or \"NotFound\"");
            }
            u.recorded_at = parse_timestamp(rec.at("recorded_at").get<std::string>());
            ui_depths_[u.app_id] = u;
        } else {
            throw DataError(where + "unknown record kind '" + kind + "'");
        }
    } catch (const json::exception& e) {
        throw DataError(where + e.what());
    } catch (const DataError& e) {
        const std::string msg = e.what();
        if (msg.rfind("ledger line", 0) == 0) throw;
        throw DataError(where + msg);
    }
}

template <class Fn>
auto Ledger::mutate(Fn&& fn) {
    if (path_.empty()) {
        const auto rec = fn();
        apply(rec.dump(), requests_.size() + ui_depths_.size() + 1);
        return rec;
    }
    LockedFile file(path_);
    requests_.clear();
    by_id_.clear();
    ui_depths_.clear();
    replay(file.read_all());
    const auto rec = fn();
    const auto line = rec.dump();
    apply(line, 0);
    file.append(line + "\n");
    return rec;
}

AccessRequest Ledger::open_request(const std::string& app_id, MethodKind method, RightRequested right,
                                   Timestamp opened_at, const std::string& notes) {
    if (trim(app_id).empty()) throw UsageError("app id must not be empty");
    if (corpus_ && !corpus_->count(app_id)) throw DataError("app " + app_id + " is not in the corpus");
    const auto rec = mutate([&] {
        for (const auto& r : requests_) {
            if (!r.terminal() && r.app_id == app_id && r.method == method && r.right == right)
                throw DataError("request " + r.request_id + " for the same app, method and right is still pending");
        }
        ordered_json j = {{"kind", "open"},
                          {"request_id", format_request_id(requests_.size() + 1)},
                          {"app_id", app_id},
                          {"method", to_string(method)},
                          {"right", to_string(right)},
                          {"opened_at", format_timestamp(opened_at)}};
        if (!notes.empty()) j["notes"] = notes;
        return j;
    });
    return requests_[by_id_.at(rec["request_id"].template get<std::string>())];
}

AccessRequest Ledger::record_feedback(const std::string& request_id, Timestamp feedback_at, Outcome outcome,
                                      const std::string& notes, bool immediate_view) {
    mutate([&] {
        const auto it = by_id_.find(request_id);
        if (it == by_id_.end()) throw DataError("unknown request id " + request_id);
        const auto& r = requests_[it->second];
        if (r.terminal()) throw DataError("request " + request_id + " already has an outcome");
        if (feedback_at < r.opened_at) throw DataError("feedback time precedes the opening of " + request_id);
        ordered_json j = {{"kind", "feedback"},
                          {"request_id", request_id},
                          {"feedback_at", format_timestamp(feedback_at)},
                          {"outcome", to_string(outcome)}};
        if (immediate_view) j["immediate_view"] = true;
        if (!notes.empty()) j["notes"] = notes;
        return j;
    });
    return requests_[by_id_.at(request_id)];
}

UiDepthRecord Ledger::record_ui_depth(const std::string& app_id, std::optional<int> depth, Timestamp recorded_at) {
    if (depth && (*depth < min_ui_depth || *depth > max_ui_depth))
        throw DataError("UI depth must be between 2 and 5, got " + std::to_string(*depth));
    if (corpus_ && !corpus_->count(app_id)) throw DataError("app " + app_id + " is not in the corpus");
    mutate([&] {
        return ordered_json{{"kind", "ui_depth"},
                            {"app_id", app_id},
                            {"depth", depth ? ordered_json(*depth) : ordered_json("NotFound")},
                            {"recorded_at", format_timestamp(recorded_at)}};
    });
    return ui_depths_.at(app_id);
}

// ---------------------------------------------------------------------------
// Summaries

std::vector<AuthenticityRow> authenticity_summary(const std::vector<AccessRequest>& requests) {
    std::map<std::pair<std::string, MethodKind>, Outcome> best;
    for (const auto& r : requests) {
        if (!r.outcome) continue;
        const auto key = std::make_pair(r.app_id, r.method);
        const auto it = best.find(key);
        if (it == best.end() || *r.outcome > it->second) best[key] = *r.outcome;
    }
    std::vector<AuthenticityRow> rows;
    for (auto m : all_methods) {
        AuthenticityRow row;
        row.method = m;
        for (const auto& [key, outcome] : best) {
            if (key.second != m) continue;
            if (outcome == Outcome::Failure) ++row.failure;
            else if (outcome == Outcome::ViewInformation) ++row.view;
            else ++row.copy;
        }
        rows.push_back(row);
    }
    return rows;
}

std::map<FeedbackBucket, long long> feedback_histogram(const std::vector<AccessRequest>& requests, Timestamp horizon,
                                                       const BucketBounds& bounds) {
    std::map<FeedbackBucket, long long> h;
    for (auto b : all_feedback_buckets) h[b] = 0;
    for (const auto& r : requests) ++h[bucket_duration(r, horizon, r.immediate_view, bounds)];
    return h;
}

std::map<std::optional<int>, long long> ui_depth_histogram(const std::map<std::string, UiDepthRecord>& depths) {
    std::map<std::optional<int>, long long> h;
    for (int d = min_ui_depth; d <= max_ui_depth; ++d) h[d] = 0;
    h[std::nullopt] = 0;
    for (const auto& [app, rec] : depths) ++h[rec.depth];
    return h;
}

}  // namespace rads
