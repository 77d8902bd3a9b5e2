#include "rads/paragraph_extractor.hpp"

#include "rads/embedded_data.hpp"
#include "rads/error.hpp"
#include "rads/net.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <set>

#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace rads {

using json = nlohmann::json;

std::string_view to_string(CategoryLabel l) {
    switch (l) {
        case CategoryLabel::FirstPartyCollectionUse: return "FirstPartyCollectionUse";
        case CategoryLabel::ThirdPartySharingCollection: return "ThirdPartySharingCollection";
        case CategoryLabel::UserAccessEditDeletion: return "UserAccessEditDeletion";
        case CategoryLabel::DataRetention: return "DataRetention";
        case CategoryLabel::DataSecurity: return "DataSecurity";
        case CategoryLabel::InternationalSpecificAudiences: return "InternationalSpecificAudiences";
        case CategoryLabel::DoNotTrack: return "DoNotTrack";
        case CategoryLabel::PolicyChange: return "PolicyChange";
        case CategoryLabel::UserChoiceControl: return "UserChoiceControl";
        case CategoryLabel::IntroductoryGeneric: return "IntroductoryGeneric";
        case CategoryLabel::PracticeNotCovered: return "PracticeNotCovered";
        case CategoryLabel::PrivacyContactInformation: return "PrivacyContactInformation";
    }
    return "IntroductoryGeneric";
}

namespace {

std::string alnum_lower(std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::string_view listing_name(CategoryLabel l) {
    switch (l) {
        case CategoryLabel::FirstPartyCollectionUse: return "First Party Collection/Use";
        case CategoryLabel::ThirdPartySharingCollection: return "Third Party Sharing/Collection";
        case CategoryLabel::UserAccessEditDeletion: return "User Access, Edit and Deletion";
        case CategoryLabel::DataRetention: return "Data Retention";
        case CategoryLabel::DataSecurity: return "Data Security";
        case CategoryLabel::InternationalSpecificAudiences: return "International and Specific Audiences";
        case CategoryLabel::DoNotTrack: return "Do Not Track";
        case CategoryLabel::PolicyChange: return "Policy Change";
        case CategoryLabel::UserChoiceControl: return "User Choice/Control";
        case CategoryLabel::IntroductoryGeneric: return "Introductory/Generic";
        case CategoryLabel::PracticeNotCovered: return "Practice Not Covered";
        case CategoryLabel::PrivacyContactInformation: return "Privacy Contact Information";
    }
    return "";
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Non-overlapping occurrences of `needle` in `hay` (both lower-case). Edges that
// are word characters must sit on word boundaries.
int count_occurrences(std::string_view hay, std::string_view needle) {
    if (needle.empty()) return 0;
    int n = 0;
    std::size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string_view::npos) {
        const auto end = pos + needle.size();
        const bool left_ok = !is_word_char(needle.front()) || pos == 0 || !is_word_char(hay[pos - 1]);
        const bool right_ok = !is_word_char(needle.back()) || end == hay.size() || !is_word_char(hay[end]);
        if (left_ok && right_ok) {
            ++n;
            pos = end;
        } else {
            ++pos;
        }
    }
    return n;
}

}  // namespace

std::optional<CategoryLabel> parse_category_label(std::string_view s) {
    const auto key = alnum_lower(s);
    for (auto l : all_category_labels) {
        if (key == alnum_lower(to_string(l)) || key == alnum_lower(listing_name(l))) return l;
    }
    return std::nullopt;
}

std::string_view to_string(SelectionReason r) {
    return r == SelectionReason::UAED ? "UAED" : "AdjacentPCI";
}

Lexicon parse_lexicon(std::string_view json_text) {
    const auto doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("lexicon must be a JSON object");
    const json& cats = doc.contains("categories") ? doc.at("categories") : doc;
    Lexicon lex;
    for (const auto& [name, phrases] : cats.items()) {
        const auto label = parse_category_label(name);
        if (!label) throw DataError("unknown lexicon category '" + name + "'");
        if (!phrases.is_array()) throw DataError("lexicon category '" + name + "' must be a list");
        auto& list = lex[*label];
        for (const auto& entry : phrases) {
            WeightedPhrase wp;
            if (entry.is_string()) {
                wp.phrase = entry.get<std::string>();
            } else if (entry.is_object() && entry.contains("phrase")) {
                wp.phrase = entry.at("phrase").get<std::string>();
                wp.weight = entry.value("weight", 1.0);
            } else {
                throw DataError("bad lexicon entry under '" + name + "'");
            }
            wp.phrase = to_lower(trim(wp.phrase));
            if (wp.phrase.empty() || !(wp.weight > 0.0)) throw DataError("empty phrase or non-positive weight under '" + name + "'");
            list.push_back(std::move(wp));
        }
    }
    if (lex.empty()) throw DataError("lexicon is empty");
    return lex;
}

const Lexicon& default_lexicon() {
    static const Lexicon lex = parse_lexicon(embedded::lexicon_json);
    return lex;
}

std::map<CategoryLabel, double> lexicon_hits(std::string_view text, const Lexicon& lexicon) {
    const auto lower = to_lower(text);
    std::map<CategoryLabel, double> hits;
    for (const auto& [label, phrases] : lexicon) {
        double total = 0.0;
        for (const auto& wp : phrases) total += wp.weight * count_occurrences(lower, wp.phrase);
        if (total > 0.0) hits[label] = total;
    }
    return hits;
}

namespace {

ClassifiedParagraph classify_with_lexicon(const Paragraph& p, const Lexicon& lexicon) {
    const auto hits = lexicon_hits(p.text, lexicon);
    ClassifiedParagraph out{p, CategoryLabel::IntroductoryGeneric, 0.0};
    double best = 0.0, total = 0.0;
    // std::map iterates in enum order, so strict '>' keeps the earliest on ties
    for (const auto& [label, w] : hits) {
        total += w;
        if (w > best) {
            best = w;
            out.label = label;
        }
    }
    out.score = total > 0.0 ? best / total : 0.0;
    return out;
}

}  // namespace

CategoryLabel keyword_baseline_classify(const Paragraph& p, const Lexicon& lexicon) {
    if (lexicon.empty()) throw UsageError("lexicon is empty");
    return classify_with_lexicon(p, lexicon).label;
}

KeywordClassifier::KeywordClassifier(Lexicon lexicon) : lexicon_(std::move(lexicon)) {
    if (lexicon_.empty()) throw UsageError("lexicon is empty");
}

ClassifiedParagraph KeywordClassifier::classify(const Paragraph& p) {
    return classify_with_lexicon(p, lexicon_);
}

namespace {

ClassifiedParagraph parse_backend_label(const Paragraph& p, std::string_view label_text, double score,
                                        std::string_view backend) {
    const auto label = parse_category_label(label_text);
    if (!label) {
        throw ExternalError(std::string(backend) + " classifier returned unknown label '" +
                            std::string(label_text) + "' for paragraph " + std::to_string(p.index));
    }
    return {p, *label, std::clamp(score, 0.0, 1.0)};
}

}  // namespace

ProcessClassifier::ProcessClassifier(std::string command) : command_(std::move(command)) {
    if (trim(command_).empty()) throw UsageError("exec classifier needs a command");
}

ProcessClassifier::~ProcessClassifier() { stop(); }

void ProcessClassifier::start() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw ExternalError("socketpair failed");
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw ExternalError("fork failed");
    }
    if (pid == 0) {
        ::dup2(fds[1], STDIN_FILENO);
        ::dup2(fds[1], STDOUT_FILENO);
        ::close(fds[0]);
        ::close(fds[1]);
        ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(fds[1]);
    pid_ = pid;
    to_child_ = from_child_ = fds[0];
}

void ProcessClassifier::stop() {
    if (to_child_ >= 0) {
        ::shutdown(to_child_, SHUT_WR);
        ::close(to_child_);
    }
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
        int status = 0;
        ::waitpid(pid_, &status, 0);
    }
    pid_ = -1;
}

ClassifiedParagraph ProcessClassifier::classify(const Paragraph& p) {
    std::lock_guard lock(mutex_);
    auto fail = [&](const std::string& why) {
        stop();
        return ExternalError("external classifier unavailable at paragraph " + std::to_string(p.index) + ": " + why);
    };
    if (pid_ < 0) start();

    std::string line = p.text;
    std::replace(line.begin(), line.end(), '\n', ' ');
    std::replace(line.begin(), line.end(), '\r', ' ');
    line.push_back('\n');
    for (std::size_t off = 0; off < line.size();) {
        const auto n = ::send(to_child_, line.data() + off, line.size() - off, MSG_NOSIGNAL);
        if (n <= 0) throw fail("write failed");
        off += static_cast<std::size_t>(n);
    }
    std::size_t nl;
    while ((nl = buffer_.find('\n')) == std::string::npos) {
        char chunk[512];
        const auto n = ::read(from_child_, chunk, sizeof chunk);
        if (n <= 0) throw fail("process closed its output");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
    std::string reply = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);
    if (!reply.empty() && reply.back() == '\r') reply.pop_back();

    double score = 1.0;
    std::string label = reply;
    if (const auto tab = reply.find('\t'); tab != std::string::npos) {
        label = reply.substr(0, tab);
        try {
            score = std::stod(reply.substr(tab + 1));
        } catch (const std::exception&) {
            score = 1.0;
        }
    }
    return parse_backend_label(p, trim(label), score, "external");
}

HttpClassifier::HttpClassifier(std::string url) : url_(std::move(url)) { (void)net::parse_url(url_); }

ClassifiedParagraph HttpClassifier::classify(const Paragraph& p) {
    const json body = {{"index", p.index}, {"text", p.text}};
    net::Response res;
    try {
        res = net::post(url_, body.dump(), "application/json");
    } catch (const ExternalError& e) {
        throw ExternalError("remote classifier unavailable at paragraph " + std::to_string(p.index) + ": " + e.what());
    }
    if (res.status != 200) {
        throw ExternalError("remote classifier returned HTTP " + std::to_string(res.status) + " at paragraph " +
                            std::to_string(p.index));
    }
    const auto reply = json::parse(res.body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("label") || !reply["label"].is_string()) {
        throw ExternalError("remote classifier sent malformed reply at paragraph " + std::to_string(p.index));
    }
    const double score = reply.contains("score") && reply["score"].is_number() ? reply["score"].get<double>() : 1.0;
    return parse_backend_label(p, reply["label"].get<std::string>(), score, "remote");
}

std::unique_ptr<Classifier> make_classifier(const std::string& backend, const Lexicon& lexicon) {
    if (backend.empty() || backend == "builtin") return std::make_unique<KeywordClassifier>(lexicon);
    if (backend.rfind("exec:", 0) == 0) return std::make_unique<ProcessClassifier>(backend.substr(5));
    if (net::looks_like_url(backend)) return std::make_unique<HttpClassifier>(backend);
    if (backend.rfind("http:", 0) == 0) return std::make_unique<HttpClassifier>(backend.substr(5));
    throw UsageError("unknown classifier '" + backend + "' (expected builtin, exec:<cmd> or http:<url>)");
}

ClassifiedParagraph classify_paragraph(const Paragraph& p, Classifier& classifier) {
    return classifier.classify(p);
}

RadsExcerpt extract_rads_paragraphs(const std::string& app_id, const std::vector<ClassifiedParagraph>& classified) {
    std::set<std::size_t> uaed;
    for (const auto& c : classified) {
        if (c.label == CategoryLabel::UserAccessEditDeletion) uaed.insert(c.paragraph.index);
    }
    RadsExcerpt excerpt{app_id, {}};
    std::set<std::size_t> taken;
    for (const auto& c : classified) {
        const auto idx = c.paragraph.index;
        if (taken.count(idx)) continue;
        if (c.label == CategoryLabel::UserAccessEditDeletion) {
            excerpt.members.push_back({c.paragraph, c.label, SelectionReason::UAED});
            taken.insert(idx);
        } else if (c.label == CategoryLabel::PrivacyContactInformation &&
                   ((idx > 0 && uaed.count(idx - 1)) || uaed.count(idx + 1))) {
            excerpt.members.push_back({c.paragraph, c.label, SelectionReason::AdjacentPCI});
            taken.insert(idx);
        }
    }
    return excerpt;
}

std::vector<ClassifiedParagraph> as_classified(const RadsExcerpt& excerpt) {
    std::vector<ClassifiedParagraph> out;
    out.reserve(excerpt.members.size());
    for (const auto& m : excerpt.members) out.push_back({m.paragraph, m.label, 1.0});
    return out;
}

std::string excerpt_to_json(const RadsExcerpt& excerpt) {
    json members = json::array();
    for (const auto& m : excerpt.members) {
        members.push_back({
            {"index", m.paragraph.index},
            {"text", m.paragraph.text},
            {"span", {m.paragraph.span.begin, m.paragraph.span.end}},
            {"label", to_string(m.label)},
            {"reason", to_string(m.reason)},
        });
    }
    return json{{"app_id", excerpt.app_id}, {"members", members}}.dump(2) + "\n";
}

RadsExcerpt excerpt_from_json(std::string_view text) {
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("excerpt must be a JSON object");
    RadsExcerpt ex;
    try {
        ex.app_id = doc.at("app_id").get<std::string>();
        for (const auto& m : doc.value("members", json::array())) {
            ExcerptMember member;
            member.paragraph.index = m.at("index").get<std::size_t>();
            member.paragraph.text = m.at("text").get<std::string>();
            if (m.contains("span")) member.paragraph.span = {m["span"][0].get<std::size_t>(), m["span"][1].get<std::size_t>()};
            const auto label = parse_category_label(m.at("label").get<std::string>());
            if (!label) throw DataError("unknown label in excerpt");
            member.label = *label;
            member.reason = m.value("reason", "UAED") == "AdjacentPCI" ? SelectionReason::AdjacentPCI : SelectionReason::UAED;
            ex.members.push_back(std::move(member));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed excerpt: ") + e.what());
    }
    return ex;
}

}  // namespace rads
