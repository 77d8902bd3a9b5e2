#pragma once

#include "rads/util.hpp"

#include <cstddef>
#include <filesystem>
#include <semaphore>
#include <string>
#include <vector>

namespace rads {

struct RawPolicy {
    std::string app_id;
    std::string source;       // URL or local path
    std::string html;         // raw bytes as fetched
    Timestamp fetched_at{};
    std::string content_type;
    bool treat_as_text = false;  // set when the source was not HTML
    std::vector<std::string> warnings;
};

/// Half-open byte range [begin, end) into PolicyDocument::text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

struct PolicyDocument {
    std::string app_id;
    std::string language_tag;
    std::string text;
    std::vector<Span> paragraph_spans;
    bool encoding_replaced = false;  // lossy UTF-8 repair happened
};

struct Paragraph {
    std::size_t index = 0;
    std::string text;
    Span span;
};

struct FetchOptions {
    int max_redirects = 5;
    std::chrono::seconds timeout{30};
};

/// Fetches policies while bounding the number of concurrent network requests.
class PolicyFetcher {
public:
    explicit PolicyFetcher(int max_concurrent = 4, FetchOptions opts = {});

    /// `source` is an http(s) URL or a local file path.
    [[nodiscard]] RawPolicy fetch(const std::string& app_id, const std::string& source);

private:
    std::counting_semaphore<1024> slots_;
    FetchOptions opts_;
};

[[nodiscard]] RawPolicy fetch_policy(const std::string& app_id, const std::string& source);

/// Strips markup, drops script/style content, decodes entities and records one
/// span per block-level paragraph. Throws DataError("no textual content") when
/// nothing is left.
[[nodiscard]] PolicyDocument html_to_plaintext(const RawPolicy& raw);

/// Paragraphs shorter than three characters after trimming are dropped;
/// surviving paragraphs are re-indexed from zero.
[[nodiscard]] std::vector<Paragraph> segment_paragraphs(const PolicyDocument& doc);

/// Writes `<dir>/<app_id>.txt` and the `<dir>/<app_id>.json` sidecar. Returns the sidecar path.
std::filesystem::path write_document(const std::filesystem::path& dir, const PolicyDocument& doc,
                                     const RawPolicy& raw);
/// Loads a document from either the sidecar JSON or the text file (sidecar looked up beside it).
[[nodiscard]] PolicyDocument read_document(const std::filesystem::path& path);

}  // namespace rads
