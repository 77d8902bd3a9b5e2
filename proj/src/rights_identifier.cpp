#include "rads/rights_identifier.hpp"

#include "rads/embedded_data.hpp"
#include "rads/error.hpp"
#include "rads/net.hpp"
#include "rads/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace rads {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Prompt

PromptTemplate parse_prompt_template(std::string_view text) {
    PromptTemplate t;
    std::string* section = nullptr;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '#') {
            if (t.version.empty()) {
                if (const auto pos = line.find("version"); pos != std::string::npos) {
                    t.version = std::string(trim(std::string_view(line).substr(pos + 7)));
                    if (!t.version.empty() && t.version.back() == '.') t.version.pop_back();
                }
            }
            continue;
        }
        const auto tl = trim(line);
        if (tl == "[system]") {
            section = &t.system_text;
        } else if (tl == "[user]") {
            section = &t.user_text;
        } else if (section) {
            if (!section->empty()) section->push_back('\n');
            *section += line;
        }
    }
    t.system_text = std::string(trim(t.system_text));
    t.user_text = std::string(trim(t.user_text));
    if (t.system_text.empty() || t.user_text.empty())
        throw DataError("prompt template needs non-empty [system] and [user] sections");
    if (t.user_text.find("a1") == std::string::npos || t.user_text.find("a2") == std::string::npos)
        throw DataError("prompt template [user] section must mention the a1 and a2 answer keys");
    return t;
}

const PromptTemplate& default_prompt_template() {
    static const PromptTemplate t = parse_prompt_template(embedded::prompt_template);
    return t;
}

std::string PromptEnvelope::user_message() const {
    if (excerpt_text.empty()) return user_text;
    return user_text + "\n\n" + excerpt_text;
}

PromptEnvelope build_prompt(const RadsExcerpt& excerpt, const PromptTemplate& tmpl) {
    PromptEnvelope env{tmpl.system_text, tmpl.user_text, {}};
    for (const auto& m : excerpt.members) {
        if (!env.excerpt_text.empty()) env.excerpt_text += "\n\n";
        env.excerpt_text += m.paragraph.text;
    }
    return env;
}

// ---------------------------------------------------------------------------
// Reply parsing

namespace {

// End index (inclusive) of the brace-balanced object starting at `start`, or npos.
std::size_t match_object(std::string_view s, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i;
    }
    return std::string_view::npos;
}

const json* find_key_icase(const json& obj, std::string_view key) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (iequals(it.key(), key)) return &it.value();
    }
    return nullptr;
}

std::optional<int> coerce_right(const json& v) {
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    if (v.is_number()) return v.get<double>() != 0.0 ? 1 : 0;
    if (v.is_string()) {
        const auto s = to_lower(trim(v.get<std::string>()));
        if (s == "1" || s == "yes" || s == "true") return 1;
        if (s == "0" || s == "no" || s == "false") return 0;
    }
    return std::nullopt;
}

RightAnswer coerce_answer(const json& obj, const std::string& key, std::string_view raw,
                          std::vector<std::string>& warnings) {
    if (!obj.is_object()) throw ResponseParseError("'" + key + "' is not an object", std::string(raw));
    const json* right = find_key_icase(obj, "Right");
    if (!right) throw ResponseParseError("'" + key + "' has no Right field", std::string(raw));
    const auto r = coerce_right(*right);
    if (!r) throw ResponseParseError("'" + key + "'.Right is not 0/1", std::string(raw));

    RightAnswer ans;
    ans.right = *r;
    if (const json* methods = find_key_icase(obj, "Methods"); methods && !methods->is_null()) {
        const json list = methods->is_array() ? *methods : json::array({*methods});
        for (const auto& m : list) {
            std::optional<MethodKind> kind;
            if (m.is_number_integer()) {
                kind = method_from_code(m.get<long long>());
            } else if (m.is_string()) {
                const auto s = std::string(trim(m.get<std::string>()));
                try {
                    std::size_t used = 0;
                    const auto code = std::stoll(s, &used);
                    if (used == s.size()) kind = method_from_code(code);
                } catch (const std::exception&) {
                    kind = parse_method(s);
                }
            }
            if (kind) ans.methods.insert(*kind);
            else warnings.push_back("dropped unknown method code " + m.dump() + " in " + key);
        }
    }
    if (ans.right == 0 && !ans.methods.empty()) {
        warnings.push_back(key + " lists methods but Right is 0; methods ignored");
        ans.methods.clear();
    }
    return ans;
}

}  // namespace

ParsedAnswer parse_llm_response(std::string_view raw) {
    // Chatty replies may carry unrelated objects; the first one holding both answers wins.
    bool saw_object = false;
    for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
        const auto end = match_object(raw, pos);
        if (end == std::string_view::npos) continue;
        const auto doc = json::parse(raw.substr(pos, end - pos + 1), nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) continue;

        const json* a1 = find_key_icase(doc, "a1");
        const json* a2 = find_key_icase(doc, "a2");
        saw_object = true;
        if (!a1 || !a2) continue;
        ParsedAnswer out;
        out.answer.a1 = coerce_answer(*a1, "a1", raw, out.warnings);
        out.answer.a2 = coerce_answer(*a2, "a2", raw, out.warnings);
        return out;
    }
    if (saw_object) throw ResponseParseError("reply JSON lacks a1 or a2", std::string(raw));
    throw ResponseParseError("no JSON object found", std::string(raw));
}

std::string serialize_answer(const LlmAnswer& ans) {
    auto one = [](const RightAnswer& r) {
        json methods = json::array();
        for (auto m : r.methods) methods.push_back(static_cast<int>(m));
        return json{{"Right", r.right}, {"Methods", methods}};
    };
    return json{{"a1", one(ans.a1)}, {"a2", one(ans.a2)}}.dump();
}

RadsFinding decide_rads(const std::string& app_id, const LlmAnswer& ans) {
    RadsFinding f{app_id, RightsClass::None, {}};
    if (ans.a1.right == 1) {
        f.rights_class = RightsClass::DCAR;
        f.methods = ans.a1.methods;
        f.methods.insert(ans.a2.methods.begin(), ans.a2.methods.end());
    } else if (ans.a2.right == 1) {
        f.rights_class = RightsClass::VDAR;
        f.methods = ans.a2.methods;
    }
    return f;
}

std::string finding_to_json(const RadsFinding& f) {
    json methods = json::array();
    for (auto m : f.methods) methods.push_back(to_string(m));
    return json{{"app_id", f.app_id}, {"rights_class", to_string(f.rights_class)}, {"methods", methods}}.dump(2) + "\n";
}

RadsFinding finding_from_json(std::string_view text) {
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("finding must be a JSON object");
    RadsFinding f;
    try {
        f.app_id = doc.at("app_id").get<std::string>();
        const auto rc = parse_rights_class(doc.at("rights_class").get<std::string>());
        if (!rc) throw DataError("unknown rights_class in finding for " + f.app_id);
        f.rights_class = *rc;
        for (const auto& m : doc.value("methods", json::array())) {
            std::optional<MethodKind> kind =
                m.is_number_integer() ? method_from_code(m.get<long long>()) : parse_method(m.get<std::string>());
            if (!kind) throw DataError("unknown method " + m.dump() + " in finding for " + f.app_id);
            f.methods.insert(*kind);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed finding: ") + e.what());
    }
    if (f.rights_class == RightsClass::None && !f.methods.empty())
        throw DataError("finding for " + f.app_id + " has methods but no access right");
    return f;
}

// ---------------------------------------------------------------------------
// Transports

MockTransport::MockTransport(std::string_view replay_json) {
    const auto doc = json::parse(replay_json, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("replay file must be a JSON object");
    auto to_reply = [](const json& v) {
        Reply r;
        if (v.is_string()) {
            r.text = v.get<std::string>();
        } else if (v.is_object() && v.contains("error")) {
            r.error = v["error"].get<std::string>();
            if (r.error != "transient" && r.error != "fatal") throw DataError("replay error must be transient or fatal");
        } else {
            r.text = v.dump();
        }
        return r;
    };
    const auto replies = doc.value("replies", json::object());
    for (const auto& [app, v] : replies.items()) {
        auto& list = replies_[app];
        if (v.is_array()) {
            for (const auto& e : v) list.push_back(to_reply(e));
        } else {
            list.push_back(to_reply(v));
        }
        if (list.empty()) throw DataError("empty reply list for " + app);
    }
    if (doc.contains("default")) default_ = to_reply(doc["default"]);
}

std::string MockTransport::complete(const LlmRequest& request) {
    Reply reply;
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        const auto it = replies_.find(request.app_id);
        if (it != replies_.end()) {
            auto& cur = cursor_[request.app_id];
            reply = it->second[std::min(cur, it->second.size() - 1)];
            ++cur;
        } else if (default_) {
            reply = *default_;
        } else {
            throw ExternalError("mock transport has no reply for " + request.app_id);
        }
    }
    if (reply.error == "transient") throw ExternalError("simulated transient failure", true);
    if (reply.error == "fatal") throw ExternalError("simulated fatal failure", false);
    return reply.text;
}

std::size_t MockTransport::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

HttpLlmTransport::HttpLlmTransport(HttpLlmConfig cfg) : cfg_(std::move(cfg)) {
    (void)net::parse_url(cfg_.url);
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
    if (api_key_.empty()) throw UsageError("live LLM mode needs the " + cfg_.api_key_env + " environment variable");
}

std::string HttpLlmTransport::complete(const LlmRequest& request) {
    const json body = {
        {"model", cfg_.model},
        {"temperature", 0},
        {"messages",
         json::array({{{"role", "system"}, {"content", request.prompt.system_text}},
                      {{"role", "user"}, {"content", request.prompt.user_message()}}})},
    };
    net::RequestOptions opts;
    opts.timeout = cfg_.timeout;
    opts.headers["Authorization"] = "Bearer " + api_key_;
    const auto res = net::post(cfg_.url, body.dump(), "application/json", opts);
    if (res.status == 429 || res.status >= 500) {
        throw ExternalError("LLM endpoint returned HTTP " + std::to_string(res.status), true);
    }
    if (res.status != 200) throw ExternalError("LLM endpoint returned HTTP " + std::to_string(res.status));
    const auto reply = json::parse(res.body, nullptr, false);
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw ExternalError("LLM endpoint sent an unexpected response body");
    }
}

LlmHandle::LlmHandle(std::unique_ptr<LlmTransport> transport, RetryPolicy retry, LlmLimits limits, Sleeper sleeper)
    : transport_(std::move(transport)),
      retry_(retry),
      limits_(limits),
      sleep_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      in_flight_(std::clamp(limits.max_in_flight, 1, 1024)) {
    if (!transport_) throw UsageError("LLM handle needs a transport");
    if (retry_.attempts < 1) retry_.attempts = 1;
}

void LlmHandle::pace() {
    if (limits_.min_interval.count() <= 0) return;
    std::lock_guard lock(pace_mutex_);
    const auto now = std::chrono::steady_clock::now();
    if (now < next_start_) {
        sleep_(std::chrono::ceil<std::chrono::milliseconds>(next_start_ - now));
    }
    next_start_ = std::max(now, next_start_) + limits_.min_interval;
}

std::string LlmHandle::complete(const LlmRequest& request) {
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    auto backoff = retry_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        pace();
        try {
            return transport_->complete(request);
        } catch (const ExternalError& e) {
            if (!e.transient()) throw;
            if (attempt >= retry_.attempts) {
                throw ExternalError("LLM transport exhausted after " + std::to_string(attempt) +
                                    " attempts for " + request.app_id + ": " + e.what());
            }
        }
        sleep_(backoff);
        backoff = std::chrono::milliseconds(static_cast<long long>(backoff.count() * retry_.multiplier));
    }
}

std::unique_ptr<LlmHandle> make_llm(const std::string& mode, RetryPolicy retry, LlmLimits limits) {
    if (mode.rfind("mock:", 0) == 0) {
        const auto path = mode.substr(5);
        return std::make_unique<LlmHandle>(std::make_unique<MockTransport>(read_file(path)), retry, limits);
    }
    if (mode == "http" || mode.rfind("http:", 0) == 0) {
        HttpLlmConfig cfg;
        if (const char* url = std::getenv("RADS_LLM_URL")) cfg.url = url;
        if (const char* model = std::getenv("RADS_LLM_MODEL")) cfg.model = model;
        if (mode.size() > 5 && mode != "http") cfg.url = mode.substr(5);
        return std::make_unique<LlmHandle>(std::make_unique<HttpLlmTransport>(cfg), retry, limits);
    }
    throw UsageError("unknown LLM mode '" + mode + "' (expected mock:<replay-file> or http)");
}

RadsFinding identify(const RadsExcerpt& excerpt, LlmHandle& llm, const PromptTemplate& tmpl) {
    const LlmRequest request{excerpt.app_id, build_prompt(excerpt, tmpl)};
    const auto raw = llm.complete(request);
    return decide_rads(excerpt.app_id, parse_llm_response(raw).answer);
}

// ---------------------------------------------------------------------------
// Translation

std::string TableTranslator::translate(std::string_view text) {
    const auto it = table_.find(std::string(text));
    if (it == table_.end()) throw ExternalError("no translation for '" + std::string(text) + "'");
    return it->second;
}

RadsExcerpt translate_excerpt(const RadsExcerpt& excerpt, Translator& translator) {
    RadsExcerpt out = excerpt;
    for (auto& m : out.members) {
        try {
            m.paragraph.text = translator.translate(m.paragraph.text);
        } catch (const std::exception& e) {
            throw ExternalError("translation failed for paragraph " + std::to_string(m.paragraph.index) + ": " +
                                e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

TargetMetrics metrics_from_counts(std::string target, const ConfusionCounts& c) {
    TargetMetrics m;
    m.target = std::move(target);
    m.counts = c;
    const auto total = c.tp + c.fp + c.fn + c.tn;
    m.accuracy = total > 0 ? static_cast<double>(c.tp + c.tn) / static_cast<double>(total) : 0.0;
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    return m;
}

MetricsReport evaluate_classifier(const std::vector<RadsFinding>& predicted, const std::vector<RadsFinding>& labeled) {
    std::unordered_map<std::string, const RadsFinding*> gold;
    for (const auto& f : labeled) {
        if (!gold.emplace(f.app_id, &f).second) throw DataError("duplicate app id in labels: " + f.app_id);
    }
    if (predicted.size() != labeled.size()) throw DataError("prediction and label sets cover different apps");
    std::set<std::string> seen;
    for (const auto& p : predicted) {
        if (!seen.insert(p.app_id).second) throw DataError("duplicate app id in predictions: " + p.app_id);
        if (!gold.count(p.app_id)) throw DataError("app " + p.app_id + " has a prediction but no label");
    }

    using Pred = std::function<bool(const RadsFinding&)>;
    std::vector<std::pair<std::string, Pred>> targets = {
        {"VDAR", [](const RadsFinding& f) { return f.rights_class == RightsClass::VDAR; }},
        {"DCAR", [](const RadsFinding& f) { return f.rights_class == RightsClass::DCAR; }},
    };
    for (auto m : all_methods) {
        targets.emplace_back(std::string(to_string(m)), [m](const RadsFinding& f) { return f.methods.count(m) > 0; });
    }

    MetricsReport report;
    for (const auto& [name, holds] : targets) {
        ConfusionCounts c;
        for (const auto& p : predicted) {
            const bool pred = holds(p);
            const bool truth = holds(*gold.at(p.app_id));
            if (pred && truth) ++c.tp;
            else if (pred) ++c.fp;
            else if (truth) ++c.fn;
            else ++c.tn;
        }
        report.targets.push_back(metrics_from_counts(name, c));
    }
    return report;
}

std::string metrics_to_json(const MetricsReport& report) {
    json targets = json::array();
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    for (const auto& t : report.targets) {
        targets.push_back({
            {"target", t.target},
            {"tp", t.counts.tp}, {"fp", t.counts.fp}, {"fn", t.counts.fn}, {"tn", t.counts.tn},
            {"accuracy", t.accuracy},
            {"precision", opt(t.precision)},
            {"recall", opt(t.recall)},
            {"f1", opt(t.f1)},
        });
    }
    return json{{"targets", targets}}.dump(2) + "\n";
}

std::string metrics_to_text(const MetricsReport& report) {
    auto pct = [](const std::optional<double>& v) -> std::string {
        if (!v) return "-";
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
        return buf;
    };
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-18s %5s %5s %5s %5s %8s %8s %8s %8s\n", "target", "tp", "fp", "fn", "tn",
                  "Acc", "P", "R", "F1");
    out += line;
    for (const auto& t : report.targets) {
        std::snprintf(line, sizeof line, "%-18s %5lld %5lld %5lld %5lld %8s %8s %8s %8s\n", t.target.c_str(),
                      t.counts.tp, t.counts.fp, t.counts.fn, t.counts.tn, pct(t.accuracy).c_str(),
                      pct(t.precision).c_str(), pct(t.recall).c_str(), pct(t.f1).c_str());
        out += line;
    }
    return out;
}

}  // namespace rads
