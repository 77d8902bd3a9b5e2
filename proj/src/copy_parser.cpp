#include "rads/copy_parser.hpp"

#include "rads/csv.hpp"
#include "rads/embedded_data.hpp"
#include "rads/error.hpp"
#include "rads/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace rads {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(CopyFormat f) {
    switch (f) {
        case CopyFormat::CSV: return "CSV";
        case CopyFormat::JSON: return "JSON";
        case CopyFormat::HTML: return "HTML";
        case CopyFormat::TXT: return "TXT";
        case CopyFormat::PDF: return "PDF";
    }
    return "?";
}

std::optional<CopyFormat> parse_copy_format(std::string_view s) {
    const auto l = to_lower(trim(s));
    if (l == "csv") return CopyFormat::CSV;
    if (l == "json") return CopyFormat::JSON;
    if (l == "html" || l == "htm") return CopyFormat::HTML;
    if (l == "txt" || l == "text") return CopyFormat::TXT;
    if (l == "pdf") return CopyFormat::PDF;
    return std::nullopt;
}

namespace {

std::string_view strip_bom(std::string_view s) {
    if (s.size() >= 3 && s.substr(0, 3) == "\xEF\xBB\xBF") s.remove_prefix(3);
    return s;
}

bool looks_like_csv(std::string_view text) {
    try {
        const char delim = csv::sniff_delimiter(text);
        const auto rows = csv::parse(text, delim);
        std::size_t width = 0, counted = 0;
        for (const auto& row : rows) {
            if (row.size() == 1 && trim(row[0]).empty()) continue;
            if (counted++ == 0) width = row.size();
            else if (row.size() != width) return false;
        }
        return counted >= 2 && width >= 2;
    } catch (const DataError&) {
        return false;
    }
}

}  // namespace

CopyFormat detect_format(std::string_view bytes, std::string_view extension) {
    const auto body = trim(strip_bom(bytes));
    if (body.empty()) throw DataError("copy is empty");

    if (!extension.empty() && extension.front() == '.') extension.remove_prefix(1);
    if (const auto f = parse_copy_format(extension)) return *f;

    if (body.substr(0, 5) == "%PDF-") return CopyFormat::PDF;
    if (body.front() == '{' || body.front() == '[') return CopyFormat::JSON;
    if (body.front() == '<') {
        const auto head = to_lower(body.substr(0, 512));
        if (head.find("<html") != std::string::npos || head.find("<!doctype") != std::string::npos ||
            head.find("<body") != std::string::npos || head.find("<table") != std::string::npos)
            return CopyFormat::HTML;
    }
    if (looks_like_csv(body)) return CopyFormat::CSV;
    return CopyFormat::TXT;
}

CopyFormat detect_format(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("copy not found: " + path.string());
    return detect_format(read_file(path), path.extension().string());
}

// ---------------------------------------------------------------------------
// FlatRecord

void FlatRecord::add(const std::string& description, std::string value) {
    const auto [it, fresh] = index_.try_emplace(description, entries_.size());
    if (fresh) entries_.emplace_back(description, std::vector<std::string>{});
    entries_[it->second].second.push_back(std::move(value));
}

const std::vector<std::string>* FlatRecord::find(const std::string& description) const {
    const auto it = index_.find(description);
    return it == index_.end() ? nullptr : &entries_[it->second].second;
}

std::size_t FlatRecord::value_count() const noexcept {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.second.size();
    return n;
}

// ---------------------------------------------------------------------------
// CSV copies

std::optional<Orientation> parse_orientation(std::string_view s) {
    const auto l = to_lower(trim(s));
    if (l == "a") return Orientation::A;
    if (l == "b") return Orientation::B;
    if (l == "auto") return Orientation::Auto;
    return std::nullopt;
}

namespace {

bool blank_row(const csv::Row& row) {
    return std::all_of(row.begin(), row.end(), [](const std::string& c) { return trim(c).empty(); });
}

std::size_t used_width(const csv::Row& row) {
    std::size_t w = row.size();
    while (w > 0 && trim(row[w - 1]).empty()) --w;
    return w;
}

}  // namespace

Orientation guess_orientation(const std::vector<std::vector<std::string>>& rows) {
    if (rows.size() < 2) return Orientation::A;
    std::size_t width = 0;
    for (const auto& r : rows) width = std::max(width, used_width(r));
    if (width != 2) return Orientation::A;

    std::set<std::string> firsts;
    bool first_all_labels = true, second_all_labels = true;
    for (const auto& r : rows) {
        const auto a = r.empty() ? std::string_view{} : trim(r[0]);
        const auto b = r.size() < 2 ? std::string_view{} : trim(r[1]);
        first_all_labels = first_all_labels && contains_letter(a);
        if (!b.empty()) second_all_labels = second_all_labels && contains_letter(b);
        firsts.insert(std::string(a));
    }
    const bool mostly_unique = firsts.size() * 10 >= rows.size() * 8;
    if (!first_all_labels || !mostly_unique) return Orientation::A;
    if (second_all_labels) {
        throw UsageError("cannot tell whether the first row or the first column holds the descriptions; "
                         "pass --orientation a or --orientation b");
    }
    return Orientation::B;
}

FlatRecord parse_csv_copy(std::string_view bytes, const CsvCopyOptions& opts) {
    const auto text = strip_bom(bytes);
    const char delim = opts.delimiter ? opts.delimiter : csv::sniff_delimiter(text);
    std::vector<csv::Row> rows;
    for (auto& row : csv::parse(text, delim)) {
        if (!blank_row(row)) rows.push_back(std::move(row));
    }
    FlatRecord rec;
    if (rows.empty()) return rec;

    const auto orientation = opts.orientation == Orientation::Auto ? guess_orientation(rows) : opts.orientation;
    if (orientation == Orientation::B) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& row = rows[r];
            std::string desc(trim(row[0]));
            if (desc.empty()) desc = "row_" + std::to_string(r + 1);
            for (std::size_t c = 1; c < row.size(); ++c) {
                const auto v = trim(row[c]);
                if (!v.empty()) rec.add(desc, std::string(v));
            }
        }
        return rec;
    }

    const auto& header = rows[0];
    std::vector<std::string> descs;
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::string d(trim(header[c]));
        descs.push_back(d.empty() ? "column_" + std::to_string(c + 1) : d);
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (c >= rows[r].size()) continue;
            const auto v = trim(rows[r][c]);
            if (!v.empty()) rec.add(descs[c], std::string(v));
        }
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (used_width(rows[r]) > header.size()) {
            throw DataError("ragged CSV copy: record " + std::to_string(r + 1) + " has " +
                            std::to_string(used_width(rows[r])) + " fields, header has " +
                            std::to_string(header.size()));
        }
    }
    return rec;
}

// ---------------------------------------------------------------------------
// JSON copies

std::string escape_key_segment(std::string_view key) {
    std::string out;
    out.reserve(key.size());
    for (char c : key) {
        if (c == '.' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> split_description(std::string_view description) {
    std::vector<std::string> segs(1);
    for (std::size_t i = 0; i < description.size(); ++i) {
        const char c = description[i];
        if (c == '\\' && i + 1 < description.size()) {
            segs.back().push_back(description[++i]);
        } else if (c == '.') {
            segs.emplace_back();
        } else {
            segs.back().push_back(c);
        }
    }
    return segs;
}

namespace {

// `path` is meaningless at the root; an empty key one level down is a real segment.
void flatten(const ordered_json& node, const std::string& path, bool root, FlatRecord& out) {
    auto child = [&](const std::string& seg) { return root ? seg : path + "." + seg; };
    switch (node.type()) {
        case ordered_json::value_t::object:
            for (const auto& [k, v] : node.items()) flatten(v, child(escape_key_segment(k)), false, out);
            break;
        case ordered_json::value_t::array:
            for (std::size_t i = 0; i < node.size(); ++i) flatten(node[i], child(std::to_string(i)), false, out);
            break;
        case ordered_json::value_t::null:
        case ordered_json::value_t::discarded:
            break;
        case ordered_json::value_t::string:
            out.add(path, node.get<std::string>());
            break;
        default:
            out.add(path, node.dump());
            break;
    }
}

}  // namespace

FlatRecord parse_json_copy(std::string_view bytes) {
    const auto doc = ordered_json::parse(strip_bom(bytes), nullptr, false);
    if (doc.is_discarded()) throw DataError("malformed JSON copy");
    FlatRecord rec;
    flatten(doc, "", true, rec);
    return rec;
}

FlatRecord parse_copy(std::string_view bytes, CopyFormat format, const CsvCopyOptions& opts) {
    switch (format) {
        case CopyFormat::CSV: return parse_csv_copy(bytes, opts);
        case CopyFormat::JSON: return parse_json_copy(bytes);
        default:
            throw UsageError(std::string(to_string(format)) +
                             " copies are compared by hand; fill in the manual-assist template instead");
    }
}

// ---------------------------------------------------------------------------
// Descriptor dictionary

namespace {

std::regex compile(const std::string& pattern) {
    try {
        return std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
        throw DataError("bad descriptor pattern '" + pattern + "': " + e.what());
    }
}

bool any_segment(const std::vector<std::regex>& res, const std::vector<std::string>& segs) {
    for (const auto& re : res) {
        for (const auto& s : segs) {
            if (std::regex_search(s, re)) return true;
        }
    }
    return false;
}

}  // namespace

bool DescriptorDictionary::matches(DataCategory c, const std::vector<std::string>& segments) const {
    const auto it = compiled.find(c);
    return it != compiled.end() && any_segment(it->second, segments);
}

bool DescriptorDictionary::is_latitude(std::string_view description) const {
    return any_segment({latitude}, split_description(description));
}

bool DescriptorDictionary::is_longitude(std::string_view description) const {
    return any_segment({longitude}, split_description(description));
}

DescriptorDictionary parse_descriptor_dictionary(std::string_view text) {
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("descriptor dictionary must be a JSON object");
    DescriptorDictionary d;
    d.version = doc.value("version", 0);
    const auto cats = doc.value("categories", json::object());
    if (!cats.is_object()) throw DataError("descriptor dictionary 'categories' must be an object");
    for (const auto& [name, list] : cats.items()) {
        const auto c = parse_data_category(name);
        if (!c) throw DataError("unknown category in descriptor dictionary: " + name);
        if (!list.is_array()) throw DataError("patterns for " + name + " must be a list");
        for (const auto& p : list) {
            if (!p.is_string()) throw DataError("patterns for " + name + " must be strings");
            d.patterns[*c].push_back(p.get<std::string>());
            d.compiled[*c].push_back(compile(p.get<std::string>()));
        }
    }
    for (auto c : all_data_categories) {
        if (d.patterns[c].empty())
            throw DataError("descriptor dictionary has no pattern for " + std::string(to_string(c)));
    }
    d.latitude_pattern = doc.value("latitude", std::string("(^|[_ -])(lat|latitude)($|[_ -])"));
    d.longitude_pattern = doc.value("longitude", std::string("(^|[_ -])(lng|lon|long|longitude)($|[_ -])"));
    d.latitude = compile(d.latitude_pattern);
    d.longitude = compile(d.longitude_pattern);
    return d;
}

const DescriptorDictionary& default_descriptor_dictionary() {
    static const DescriptorDictionary d = parse_descriptor_dictionary(embedded::descriptors_json);
    return d;
}

CategoryExtraction match_categories(const FlatRecord& rec, const DescriptorDictionary& dict) {
    CategoryExtraction out;
    for (const auto& [desc, values] : rec.entries()) {
        const auto segs = split_description(desc);
        for (auto c : all_data_categories) {
            if (!dict.matches(c, segs)) continue;
            auto& list = out[c];
            for (const auto& v : values) list.push_back({desc, v});
        }
    }
    return out;
}

void merge_extraction(CategoryExtraction& into, const CategoryExtraction& from) {
    for (const auto& [c, list] : from) {
        auto& dst = into[c];
        for (const auto& ev : list) {
            if (std::find(dst.begin(), dst.end(), ev) == dst.end()) dst.push_back(ev);
        }
    }
}

std::string extraction_to_json(const CategoryExtraction& ex) {
    ordered_json doc = ordered_json::object();
    for (auto c : all_data_categories) {
        const auto it = ex.find(c);
        if (it == ex.end()) continue;
        ordered_json list = ordered_json::array();
        for (const auto& ev : it->second) list.push_back({{"description", ev.description}, {"value", ev.value}});
        doc[std::string(to_string(c))] = std::move(list);
    }
    return doc.dump(2) + "\n";
}

CategoryExtraction extraction_from_json(std::string_view text) {
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("extraction must be a JSON object");
    CategoryExtraction ex;
    for (const auto& [name, list] : doc.items()) {
        const auto c = parse_data_category(name);
        if (!c) throw DataError("unknown category in extraction: " + name);
        if (!list.is_array()) throw DataError("extraction entries for " + name + " must be a list");
        auto& dst = ex[*c];
        for (const auto& e : list) {
            if (!e.is_object() || !e.contains("value") || !e["value"].is_string())
                throw DataError("extraction entry for " + name + " needs a string 'value'");
            dst.push_back({e.value("description", std::string()), e["value"].get<std::string>()});
        }
        if (dst.empty()) ex.erase(*c);
    }
    return ex;
}

std::string manual_assist_template() {
    static constexpr std::pair<DataCategory, const char*> keys[] = {
        {DataCategory::IPAddress, "ip_address"},     {DataCategory::NetType, "net_type"},
        {DataCategory::SSID, "ssid"},                {DataCategory::AndroidID, "android_id"},
        {DataCategory::OAID, "oaid"},                {DataCategory::AAID, "aaid"},
        {DataCategory::VAID, "vaid"},                {DataCategory::MccMnc, "mcc_mnc"},
        {DataCategory::SimCountryCode, "sim_country_code"}, {DataCategory::Location, "location"},
    };
    ordered_json doc = ordered_json::object();
    for (const auto& [c, key] : keys) doc[key] = ordered_json::array();
    return doc.dump(2) + "\n";
}

}  // namespace rads
