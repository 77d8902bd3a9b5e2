#pragma once

#include "rads/domain.hpp"
#include "rads/error.hpp"
#include "rads/paragraph_extractor.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rads {

struct PromptTemplate {
    std::string version;
    std::string system_text;
    std::string user_text;
};

/// Template file: '#' comment lines, then "[system]" and "[user]" sections.
[[nodiscard]] PromptTemplate parse_prompt_template(std::string_view text);
[[nodiscard]] const PromptTemplate& default_prompt_template();

struct PromptEnvelope {
    std::string system_text;
    std::string user_text;
    std::string excerpt_text;

    /// The user message actually sent: instructions followed by the excerpt.
    [[nodiscard]] std::string user_message() const;
};

/// Excerpt paragraphs are joined by blank lines and appended after the questions.
[[nodiscard]] PromptEnvelope build_prompt(const RadsExcerpt& excerpt,
                                          const PromptTemplate& tmpl = default_prompt_template());

struct RightAnswer {
    int right = 0;                  // 0 or 1
    std::set<MethodKind> methods;   // empty when right == 0

    friend bool operator==(const RightAnswer&, const RightAnswer&) = default;
};

struct LlmAnswer {
    RightAnswer a1;  // copy of personal data
    RightAnswer a2;  // access / view personal information

    friend bool operator==(const LlmAnswer&, const LlmAnswer&) = default;
};

struct ParsedAnswer {
    LlmAnswer answer;
    std::vector<std::string> warnings;
};

/// Raised when a model reply holds no usable answer; carries the raw reply.
class ResponseParseError : public DataError {
public:
    ResponseParseError(const std::string& why, std::string raw)
        : DataError("cannot parse model reply: " + why), raw_(std::move(raw)) {}
    [[nodiscard]] const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

/// Takes the first JSON object holding "a1" and "a2" anywhere in the reply,
/// ignoring surrounding prose and code fences.
[[nodiscard]] ParsedAnswer parse_llm_response(std::string_view raw);
[[nodiscard]] std::string serialize_answer(const LlmAnswer& ans);

struct RadsFinding {
    std::string app_id;
    RightsClass rights_class = RightsClass::None;
    std::set<MethodKind> methods;

    friend bool operator==(const RadsFinding&, const RadsFinding&) = default;
};

/// a1.right = 1 -> DCAR with the union of both method sets;
/// a1.right = 0 and a2.right = 1 -> VDAR with a2's methods; otherwise None.
[[nodiscard]] RadsFinding decide_rads(const std::string& app_id, const LlmAnswer& ans);

[[nodiscard]] std::string finding_to_json(const RadsFinding& f);
[[nodiscard]] RadsFinding finding_from_json(std::string_view text);

// ---------------------------------------------------------------------------
// LLM transport

struct LlmRequest {
    std::string app_id;
    PromptEnvelope prompt;
};

class LlmTransport {
public:
    virtual ~LlmTransport() = default;
    /// Returns the model's reply text. Transient failures throw ExternalError
    /// with transient() == true.
    [[nodiscard]] virtual std::string complete(const LlmRequest& request) = 0;
};

/// Replays canned replies keyed by app id.
///
/// Replay file: {"replies": {"<app_id>": <reply> | [<reply>, ...]}, "default": <reply>}
/// where <reply> is a string, or {"error": "transient" | "fatal"} to simulate a
/// transport failure. Successive calls for one app walk the list and then stick
/// to its last element.
class MockTransport final : public LlmTransport {
public:
    explicit MockTransport(std::string_view replay_json);
    [[nodiscard]] std::string complete(const LlmRequest& request) override;
    [[nodiscard]] std::size_t calls() const;

private:
    struct Reply {
        std::string text;
        std::string error;  // empty, "transient" or "fatal"
    };
    std::map<std::string, std::vector<Reply>> replies_;
    std::optional<Reply> default_;
    mutable std::mutex mutex_;
    std::map<std::string, std::size_t> cursor_;
    std::size_t calls_ = 0;
};

struct HttpLlmConfig {
    std::string url = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4";
    std::string api_key_env = "RADS_LLM_API_KEY";
    std::chrono::seconds timeout{120};
};

/// Chat-completions style endpoint; the API key comes from the environment only.
class HttpLlmTransport final : public LlmTransport {
public:
    explicit HttpLlmTransport(HttpLlmConfig cfg);
    [[nodiscard]] std::string complete(const LlmRequest& request) override;

private:
    HttpLlmConfig cfg_;
    std::string api_key_;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
};

struct LlmLimits {
    int max_in_flight = 4;
    std::chrono::milliseconds min_interval{0};  // between request starts
};

/// Wraps a transport with retries on transient errors, an in-flight cap and a rate cap.
class LlmHandle {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit LlmHandle(std::unique_ptr<LlmTransport> transport, RetryPolicy retry = {}, LlmLimits limits = {},
                       Sleeper sleeper = {});

    [[nodiscard]] std::string complete(const LlmRequest& request);

private:
    void pace();

    std::unique_ptr<LlmTransport> transport_;
    RetryPolicy retry_;
    LlmLimits limits_;
    Sleeper sleep_;
    std::counting_semaphore<1024> in_flight_;
    std::mutex pace_mutex_;
    std::chrono::steady_clock::time_point next_start_{};
};

/// "mock:<replay-file>" or "http". Live mode reads RADS_LLM_URL / RADS_LLM_MODEL overrides.
[[nodiscard]] std::unique_ptr<LlmHandle> make_llm(const std::string& mode, RetryPolicy retry = {},
                                                  LlmLimits limits = {});

/// build_prompt -> transport -> parse -> decide.
[[nodiscard]] RadsFinding identify(const RadsExcerpt& excerpt, LlmHandle& llm,
                                   const PromptTemplate& tmpl = default_prompt_template());

// ---------------------------------------------------------------------------
// Translation hook

class Translator {
public:
    virtual ~Translator() = default;
    [[nodiscard]] virtual std::string translate(std::string_view text) = 0;
};

class IdentityTranslator final : public Translator {
public:
    [[nodiscard]] std::string translate(std::string_view text) override { return std::string(text); }
};

/// Whole-text lookup table; unknown text is a translation failure.
class TableTranslator final : public Translator {
public:
    explicit TableTranslator(std::map<std::string, std::string> table) : table_(std::move(table)) {}
    [[nodiscard]] std::string translate(std::string_view text) override;

private:
    std::map<std::string, std::string> table_;
};

/// Translates member texts, keeping structure and selection reasons.
[[nodiscard]] RadsExcerpt translate_excerpt(const RadsExcerpt& excerpt, Translator& translator);

// ---------------------------------------------------------------------------
// Evaluation

struct ConfusionCounts {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct TargetMetrics {
    std::string target;
    ConfusionCounts counts;
    double accuracy = 0.0;
    std::optional<double> precision;  // absent when tp + fp == 0
    std::optional<double> recall;     // absent when tp + fn == 0
    std::optional<double> f1;         // absent when P or R is absent or P + R == 0
};

struct MetricsReport {
    std::vector<TargetMetrics> targets;  // VDAR, DCAR, EmailContact, AccountSettings, WebformSubmission
};

[[nodiscard]] TargetMetrics metrics_from_counts(std::string target, const ConfusionCounts& c);

/// Both lists must cover the same app ids (order may differ). Throws DataError otherwise.
[[nodiscard]] MetricsReport evaluate_classifier(const std::vector<RadsFinding>& predicted,
                                                const std::vector<RadsFinding>& labeled);

[[nodiscard]] std::string metrics_to_json(const MetricsReport& report);
[[nodiscard]] std::string metrics_to_text(const MetricsReport& report);

}  // namespace rads
