#include "rads/policy_ingest.hpp"

#include "rads/error.hpp"
#include "rads/net.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace rads {

using json = nlohmann::json;

PolicyFetcher::PolicyFetcher(int max_concurrent, FetchOptions opts)
    : slots_(std::clamp(max_concurrent, 1, 1024)), opts_(opts) {}

RawPolicy PolicyFetcher::fetch(const std::string& app_id, const std::string& source) {
    RawPolicy raw;
    raw.app_id = app_id;
    raw.source = source;

    if (net::looks_like_url(source)) {
        slots_.acquire();
        net::Response res;
        try {
            net::RequestOptions ro;
            ro.max_redirects = opts_.max_redirects;
            ro.timeout = opts_.timeout;
            res = net::get(source, ro);
        } catch (...) {
            slots_.release();
            throw;
        }
        slots_.release();
        if (res.status < 200 || res.status >= 300) {
            throw ExternalError("source unreachable: " + source + " (HTTP " + std::to_string(res.status) + ")");
        }
        raw.html = std::move(res.body);
        raw.content_type = res.content_type;
        if (!raw.content_type.empty() && to_lower(raw.content_type).find("html") == std::string::npos) {
            raw.treat_as_text = true;
            raw.warnings.push_back("non-HTML content type '" + raw.content_type + "', treating as text");
        }
        if (res.final_url != source) raw.warnings.push_back("redirected to " + res.final_url);
    } else {
        std::error_code ec;
        if (!std::filesystem::is_regular_file(source, ec)) throw DataError("source unreachable: " + source);
        raw.html = read_file(source);
        const auto ext = to_lower(std::filesystem::path(source).extension().string());
        if (ext == ".txt" || ext == ".text" || ext == ".md") {
            raw.treat_as_text = true;
            raw.content_type = "text/plain";
            raw.warnings.push_back("non-HTML source, treating as text");
        } else {
            raw.content_type = "text/html";
        }
    }
    raw.fetched_at = now_utc();
    if (trim(raw.html).empty()) throw DataError("empty policy source: " + source);
    return raw;
}

RawPolicy fetch_policy(const std::string& app_id, const std::string& source) {
    PolicyFetcher fetcher(1);
    return fetcher.fetch(app_id, source);
}

namespace {

const std::unordered_set<std::string> block_tags = {
    "address", "article", "aside",  "blockquote", "body",     "caption", "center", "dd",
    "details", "dialog",  "div",    "dl",         "dt",       "fieldset", "figcaption", "figure",
    "footer",  "form",    "h1",     "h2",         "h3",       "h4",      "h5",     "h6",
    "header",  "hr",      "html",   "li",         "main",     "nav",     "ol",     "p",
    "pre",     "section", "summary", "table",     "tbody",    "thead",   "tfoot",  "tr",
    "ul",      "option",  "legend",
};

// Content of these elements is never visible text.
const std::unordered_set<std::string> skipped_tags = {
    "script", "style", "noscript", "template", "title", "svg", "iframe", "object", "head",
};

const std::unordered_map<std::string_view, char32_t> named_entities = {
    {"amp", U'&'},      {"lt", U'<'},       {"gt", U'>'},       {"quot", U'"'},    {"apos", U'\''},
    {"nbsp", U' '},     {"copy", 0xA9},     {"reg", 0xAE},      {"trade", 0x2122}, {"mdash", 0x2014},
    {"ndash", 0x2013},  {"hellip", 0x2026}, {"lsquo", 0x2018},  {"rsquo", 0x2019}, {"ldquo", 0x201C},
    {"rdquo", 0x201D},  {"bull", 0x2022},   {"middot", 0xB7},   {"euro", 0x20AC},  {"pound", 0xA3},
    {"yen", 0xA5},      {"sect", 0xA7},     {"laquo", 0xAB},    {"raquo", 0xBB},   {"eacute", 0xE9},
    {"egrave", 0xE8},   {"aacute", 0xE1},   {"agrave", 0xE0},   {"uuml", 0xFC},    {"ouml", 0xF6},
    {"auml", 0xE4},     {"szlig", 0xDF},    {"ccedil", 0xE7},   {"ntilde", 0xF1},  {"iacute", 0xED},
    {"oacute", 0xF3},   {"uacute", 0xFA},   {"shy", 0xAD},      {"zwnj", 0x200C},  {"zwj", 0x200D},
    {"ensp", U' '},     {"emsp", U' '},     {"thinsp", U' '},   {"times", 0xD7},   {"deg", 0xB0},
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

/// Accumulates paragraphs, collapsing whitespace runs to single spaces.
class ParagraphBuilder {
public:
    void add_text(std::string_view text) {
        for (char c : text) {
            if (is_space(c)) {
                pending_space_ = !current_.empty();
            } else {
                if (pending_space_) current_.push_back(' ');
                pending_space_ = false;
                current_.push_back(c);
            }
        }
    }

    void add_space() { pending_space_ = !current_.empty(); }

    void flush() {
        if (!current_.empty()) paragraphs_.push_back(std::move(current_));
        current_.clear();
        pending_space_ = false;
    }

    [[nodiscard]] std::vector<std::string> take() {
        flush();
        return std::move(paragraphs_);
    }

private:
    std::string current_;
    bool pending_space_ = false;
    std::vector<std::string> paragraphs_;
};

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        const auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back('&');
            continue;
        }
        const auto name = s.substr(i + 1, semi - i - 1);
        if (!name.empty() && name[0] == '#') {
            char32_t cp = 0;
            bool ok = name.size() > 1;
            const bool hex = ok && (name[1] == 'x' || name[1] == 'X');
            for (std::size_t k = hex ? 2 : 1; ok && k < name.size(); ++k) {
                const auto c = static_cast<unsigned char>(name[k]);
                if (hex && std::isxdigit(c)) cp = cp * 16 + (std::isdigit(c) ? c - '0' : (std::tolower(c) - 'a' + 10));
                else if (!hex && std::isdigit(c)) cp = cp * 10 + (c - '0');
                else ok = false;
                if (cp > 0x10FFFF) ok = false;
            }
            if (ok && name.size() > (hex ? 2u : 1u)) {
                append_utf8(out, cp == 0xA0 ? U' ' : cp);
                i = semi;
                continue;
            }
        } else if (auto it = named_entities.find(name); it != named_entities.end()) {
            append_utf8(out, it->second);
            i = semi;
            continue;
        }
        out.push_back('&');
    }
    return out;
}

// Feeds text into the builder, turning blank lines into paragraph boundaries.
void add_text_with_blank_lines(ParagraphBuilder& b, std::string_view text) {
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '\n') {
            std::size_t j = i + 1;
            while (j < text.size() && text[j] != '\n' && is_space(text[j])) ++j;
            if (j < text.size() && text[j] == '\n') {
                b.add_text(text.substr(start, i - start));
                b.flush();
                while (j < text.size() && is_space(text[j])) ++j;
                start = i = j;
                continue;
            }
        }
        ++i;
    }
    b.add_text(text.substr(start));
}

struct Tag {
    std::string name;
    bool closing = false;
    bool self_closing = false;
    std::string lang;
};

// Parses a tag starting at s[pos] == '<'. Returns the index one past '>'.
std::size_t parse_tag(std::string_view s, std::size_t pos, Tag& tag) {
    std::size_t i = pos + 1;
    if (i < s.size() && s[i] == '/') {
        tag.closing = true;
        ++i;
    }
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-' || s[i] == ':')) {
        tag.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
        ++i;
    }
    // attributes; only lang is of interest
    while (i < s.size() && s[i] != '>') {
        if (s[i] == '"' || s[i] == '\'') {
            const char q = s[i];
            const auto end = s.find(q, i + 1);
            if (end == std::string_view::npos) return s.size();
            i = end + 1;
            continue;
        }
        if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '>') tag.self_closing = true;
        if ((s[i] == 'l' || s[i] == 'L') && i > 0 && is_space(s[i - 1]) && starts_with_icase(s.substr(i), "lang=")) {
            std::size_t v = i + 5;
            if (v < s.size() && (s[v] == '"' || s[v] == '\'')) {
                const char q = s[v];
                const auto end = s.find(q, v + 1);
                if (end != std::string_view::npos) {
                    tag.lang = std::string(s.substr(v + 1, end - v - 1));
                    i = end + 1;
                    continue;
                }
            }
        }
        ++i;
    }
    return i < s.size() ? i + 1 : s.size();
}

std::string guess_language(const std::string& text) {
    std::size_t cjk = 0, letters = 0;
    for (std::size_t i = 0; i < text.size();) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            if (std::isalpha(c)) ++letters;
            ++i;
        } else if ((c & 0xF0) == 0xE0 && i + 2 < text.size()) {
            const char32_t cp = ((c & 0x0F) << 12) | ((text[i + 1] & 0x3F) << 6) | (text[i + 2] & 0x3F);
            if (cp >= 0x4E00 && cp <= 0x9FFF) ++cjk;
            ++letters;
            i += 3;
        } else {
            ++i;
        }
    }
    if (letters > 0 && cjk * 5 > letters) return "zh";
    return "en";
}

PolicyDocument assemble(const std::string& app_id, std::vector<std::string> paragraphs) {
    PolicyDocument doc;
    doc.app_id = app_id;
    for (auto& p : paragraphs) {
        const auto t = trim(p);
        if (t.empty()) continue;
        if (!doc.text.empty()) doc.text.push_back('\n');
        const auto begin = doc.text.size();
        doc.text += t;
        doc.paragraph_spans.push_back({begin, doc.text.size()});
    }
    if (doc.paragraph_spans.empty()) throw DataError("no textual content in policy for " + app_id);
    return doc;
}

std::size_t find_icase(std::string_view s, std::string_view needle, std::size_t from) {
    for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
        if (iequals(s.substr(i, needle.size()), needle)) return i;
    }
    return std::string_view::npos;
}

}  // namespace

PolicyDocument html_to_plaintext(const RawPolicy& raw) {
    std::string input = raw.html;
    const bool replaced = sanitize_utf8(input);

    ParagraphBuilder builder;
    std::string lang;

    if (raw.treat_as_text) {
        add_text_with_blank_lines(builder, input);
    } else {
        const std::string_view s = input;
        std::size_t i = 0;
        std::size_t text_start = 0;
        int consecutive_br = 0;

        auto emit_text = [&](std::size_t end) {
            if (end <= text_start) return;
            const auto chunk = s.substr(text_start, end - text_start);
            if (!trim(chunk).empty()) consecutive_br = 0;
            add_text_with_blank_lines(builder, decode_entities(chunk));
        };

        while (i < s.size()) {
            if (s[i] != '<') {
                ++i;
                continue;
            }
            if (s.substr(i, 4) == "<!--") {
                emit_text(i);
                const auto end = s.find("-->", i + 4);
                i = end == std::string_view::npos ? s.size() : end + 3;
                text_start = i;
                continue;
            }
            if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
                emit_text(i);
                const auto end = s.find('>', i);
                i = end == std::string_view::npos ? s.size() : end + 1;
                text_start = i;
                continue;
            }
            const bool starts_tag =
                i + 1 < s.size() && (std::isalpha(static_cast<unsigned char>(s[i + 1])) ||
                                     (s[i + 1] == '/' && i + 2 < s.size() &&
                                      std::isalpha(static_cast<unsigned char>(s[i + 2]))));
            if (!starts_tag) {
                ++i;  // a literal '<'
                continue;
            }
            emit_text(i);
            Tag tag;
            i = parse_tag(s, i, tag);
            text_start = i;

            if (tag.name == "html" && !tag.lang.empty() && lang.empty()) lang = tag.lang;

            if (!tag.closing && !tag.self_closing && skipped_tags.count(tag.name)) {
                const auto close = find_icase(s, "</" + tag.name, i);
                if (close == std::string_view::npos) {
                    i = s.size();
                } else {
                    const auto gt = s.find('>', close);
                    i = gt == std::string_view::npos ? s.size() : gt + 1;
                }
                text_start = i;
                continue;
            }

            if (tag.name == "br") {
                if (++consecutive_br >= 2) {
                    builder.flush();
                    consecutive_br = 0;
                } else {
                    builder.add_space();
                }
                continue;
            }
            consecutive_br = 0;
            if (block_tags.count(tag.name)) {
                builder.flush();
            } else if (tag.name == "td" || tag.name == "th" || tag.name == "img") {
                builder.add_space();
            }
        }
        emit_text(s.size());
    }

    auto doc = assemble(raw.app_id, builder.take());
    doc.encoding_replaced = replaced;
    doc.language_tag = lang.empty() ? guess_language(doc.text) : lang;
    return doc;
}

std::vector<Paragraph> segment_paragraphs(const PolicyDocument& doc) {
    std::vector<Paragraph> out;
    for (const auto& span : doc.paragraph_spans) {
        if (span.end > doc.text.size() || span.begin > span.end) continue;
        const auto text = trim(std::string_view(doc.text).substr(span.begin, span.end - span.begin));
        // count code points, not bytes
        const auto chars = std::count_if(text.begin(), text.end(),
                                         [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; });
        if (chars < 3) continue;
        out.push_back({out.size(), std::string(text), span});
    }
    return out;
}

std::filesystem::path write_document(const std::filesystem::path& dir, const PolicyDocument& doc,
                                     const RawPolicy& raw) {
    const auto text_path = dir / (doc.app_id + ".txt");
    const auto meta_path = dir / (doc.app_id + ".json");
    write_file(text_path, doc.text);

    json spans = json::array();
    for (const auto& s : doc.paragraph_spans) spans.push_back({s.begin, s.end});
    json meta = {
        {"app_id", doc.app_id},
        {"source", raw.source},
        {"fetched_at", format_timestamp(raw.fetched_at)},
        {"content_type", raw.content_type},
        {"language_tag", doc.language_tag},
        {"encoding_replaced", doc.encoding_replaced},
        {"warnings", raw.warnings},
        {"text_file", text_path.filename().string()},
        {"paragraph_spans", spans},
    };
    write_file(meta_path, meta.dump(2) + "\n");
    return meta_path;
}

PolicyDocument read_document(const std::filesystem::path& path) {
    std::filesystem::path meta_path = path;
    std::filesystem::path text_path = path;
    if (path.extension() == ".json") {
        const auto meta = json::parse(read_file(path), nullptr, false);
        if (meta.is_discarded()) throw DataError("malformed document sidecar " + path.string());
        text_path = path.parent_path() / meta.value("text_file", path.stem().string() + ".txt");
    } else {
        meta_path = std::filesystem::path(path).replace_extension(".json");
    }

    PolicyDocument doc;
    doc.text = read_file(text_path);
    if (std::filesystem::exists(meta_path)) {
        const auto meta = json::parse(read_file(meta_path), nullptr, false);
        if (meta.is_discarded() || !meta.is_object()) throw DataError("malformed document sidecar " + meta_path.string());
        doc.app_id = meta.value("app_id", text_path.stem().string());
        doc.language_tag = meta.value("language_tag", "und");
        doc.encoding_replaced = meta.value("encoding_replaced", false);
        for (const auto& s : meta.value("paragraph_spans", json::array())) {
            if (!s.is_array() || s.size() != 2) throw DataError("bad paragraph span in " + meta_path.string());
            const Span span{s[0].get<std::size_t>(), s[1].get<std::size_t>()};
            if (span.begin > span.end || span.end > doc.text.size())
                throw DataError("paragraph span outside text in " + meta_path.string());
            if (!doc.paragraph_spans.empty() && span.begin < doc.paragraph_spans.back().end)
                throw DataError("overlapping paragraph spans in " + meta_path.string());
            doc.paragraph_spans.push_back(span);
        }
        return doc;
    }
    // plain text without a sidecar: blank lines separate paragraphs
    RawPolicy raw;
    raw.app_id = text_path.stem().string();
    raw.html = doc.text;
    raw.treat_as_text = true;
    return html_to_plaintext(raw);
}

}  // namespace rads
