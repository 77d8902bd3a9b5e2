#include "rads/capture_store.hpp"

#include "rads/csv.hpp"
#include "rads/embedded_data.hpp"
#include "rads/error.hpp"

#include <json.hpp>

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace rads {

using json = nlohmann::json;

std::vector<CaptureRecord> parse_capture_csv(std::string_view text) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    const auto rows = csv::parse(text, ',');
    if (rows.empty()) throw DataError("capture file has no header");
    if (csv::format_row(rows[0]) != capture_csv_header) {
        throw DataError("capture header mismatch: expected '" + std::string(capture_csv_header) + "'");
    }
    std::vector<CaptureRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const auto where = "capture record " + std::to_string(i);
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 6 && row.size() != 5) {
            throw DataError(where + ": expected 6 fields, found " + std::to_string(row.size()));
        }
        CaptureRecord r;
        try {
            r.timestamp = parse_timestamp(row[0]);
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        r.api_name = row[1];
        if (trim(r.api_name).empty()) throw DataError(where + ": empty api_name");
        const auto cat = parse_data_category(row[2]);
        if (!cat) throw DataError(where + ": unknown category '" + row[2] + "'");
        r.category = *cat;
        r.operation = row[3];
        r.return_value = row[4];
        if (row.size() == 6) r.call_stack = row[5];
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CaptureRecord> ingest_capture_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("capture file not found: " + path.string());
    return parse_capture_csv(read_file(path));
}

std::string write_capture_csv(const std::vector<CaptureRecord>& records) {
    std::string out(capture_csv_header);
    out += "\n";
    for (const auto& r : records) {
        out += csv::format_row({format_timestamp(r.timestamp), r.api_name, std::string(to_string(r.category)),
                                r.operation, r.return_value, r.call_stack});
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical forms

namespace {

std::string canonical_ip(std::string_view raw) {
    std::string s(trim(raw));
    if (!s.empty() && s.front() == '/') s.erase(0, 1);
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    if (const auto pct = s.find('%'); pct != std::string::npos) s.erase(pct);

    // Some platform getters hand back IPv4 as a packed little-endian int.
    if (!s.empty() && std::all_of(s.begin() + (s[0] == '-' ? 1 : 0), s.end(), [](unsigned char c) {
            return std::isdigit(c) != 0;
        }) && s != "-") {
        char* end = nullptr;
        const long long v = std::strtoll(s.c_str(), &end, 10);
        if (v >= -2147483648LL && v <= 4294967295LL) {
            const auto u = static_cast<std::uint32_t>(v);
            char buf[16];
            std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", u & 0xff, (u >> 8) & 0xff, (u >> 16) & 0xff, u >> 24);
            return buf;
        }
    }

    // Zero-padded dotted quads ("192.168.001.010") are read as decimal, never octal.
    if (const auto parts = split(s, '.'); parts.size() == 4) {
        std::vector<int> octets;
        for (const auto& p : parts) {
            if (p.empty() || p.size() > 3 || !std::all_of(p.begin(), p.end(), [](unsigned char c) {
                    return std::isdigit(c) != 0;
                }))
                break;
            octets.push_back(std::stoi(std::string(p)));
        }
        if (octets.size() == 4 && std::all_of(octets.begin(), octets.end(), [](int o) { return o <= 255; })) {
            return std::to_string(octets[0]) + "." + std::to_string(octets[1]) + "." + std::to_string(octets[2]) +
                   "." + std::to_string(octets[3]);
        }
    }

    char buf[INET6_ADDRSTRLEN];
    in_addr v4{};
    if (inet_pton(AF_INET, s.c_str(), &v4) == 1) return inet_ntop(AF_INET, &v4, buf, sizeof buf);
    in6_addr v6{};
    if (inet_pton(AF_INET6, s.c_str(), &v6) == 1) {
        static const unsigned char mapped[12] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff};
        if (std::memcmp(v6.s6_addr, mapped, 12) == 0) {
            std::memcpy(&v4, v6.s6_addr + 12, 4);
            return inet_ntop(AF_INET, &v4, buf, sizeof buf);
        }
        return inet_ntop(AF_INET6, &v6, buf, sizeof buf);
    }
    throw DataError("not an IP address: '" + std::string(raw) + "'");
}

std::string canonical_id(std::string_view raw) {
    std::string out;
    for (char c : trim(raw)) {
        if (c == '-' || c == ':' || std::isspace(static_cast<unsigned char>(c))) continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (out.empty()) throw DataError("empty identifier");
    return out;
}

std::string canonical_net_type(std::string_view raw) {
    std::string key;
    for (char c : raw) {
        if (std::isalnum(static_cast<unsigned char>(c))) key.push_back(static_cast<char>(std::tolower(c)));
    }
    if (key.empty()) throw DataError("empty network type");
    if (key.rfind("type", 0) == 0 && key.size() > 4) key.erase(0, 4);
    static const std::map<std::string, std::string> synonyms = {
        {"wifi", "wifi"},         {"wlan", "wifi"},         {"1", "wifi"},
        {"mobile", "cellular"},   {"cellular", "cellular"}, {"cell", "cellular"},
        {"0", "cellular"},        {"wwan", "cellular"},     {"2g", "cellular"},
        {"3g", "cellular"},       {"4g", "cellular"},       {"5g", "cellular"},
        {"lte", "cellular"},      {"nr", "cellular"},       {"gsm", "cellular"},
        {"umts", "cellular"},     {"edge", "cellular"},     {"hspa", "cellular"},
        {"gprs", "cellular"},     {"cdma", "cellular"},     {"ethernet", "ethernet"},
        {"eth", "ethernet"},      {"9", "ethernet"},        {"lan", "ethernet"},
    };
    const auto it = synonyms.find(key);
    return it == synonyms.end() ? "other" : it->second;
}

std::optional<double> parse_number(std::string_view s) {
    const std::string t(trim(s));
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string canonical_location(std::string_view raw, const CanonicalOptions& opts) {
    std::string s;
    for (char c : trim(raw)) {
        if (c != '(' && c != ')' && c != '[' && c != ']') s.push_back(c);
    }
    std::vector<std::string> parts;
    if (s.find(',') != std::string::npos) {
        parts = split(s, ',');
    } else if (s.find(';') != std::string::npos) {
        parts = split(s, ';');
    } else {
        for (const auto& p : split(s, ' ')) {
            if (!trim(p).empty()) parts.push_back(p);
        }
    }
    if (parts.size() != 2) throw DataError("location must be 'lat,lon': '" + std::string(raw) + "'");
    const auto lat = parse_number(parts[0]);
    const auto lon = parse_number(parts[1]);
    if (!lat || !lon) throw DataError("non-numeric coordinate in '" + std::string(raw) + "'");
    if (std::abs(*lat) > 90.0 || std::abs(*lon) > 180.0)
        throw DataError("coordinate out of range in '" + std::string(raw) + "'");
    return fixed(*lat, opts.location_decimals) + "," + fixed(*lon, opts.location_decimals);
}

}  // namespace

std::optional<std::string> canonical_coordinate(std::string_view raw, const CanonicalOptions& opts) {
    const auto v = parse_number(raw);
    if (!v || std::abs(*v) > 180.0) return std::nullopt;
    return fixed(*v, opts.location_decimals);
}

std::string canonicalize(DataCategory category, std::string_view raw, const CanonicalOptions& opts) {
    const auto t = trim(raw);
    if (t.empty()) throw DataError("empty value for " + std::string(to_string(category)));
    switch (category) {
        case DataCategory::IPAddress: return canonical_ip(t);
        case DataCategory::AndroidID:
        case DataCategory::OAID:
        case DataCategory::AAID:
        case DataCategory::VAID: return canonical_id(t);
        case DataCategory::SSID: {
            std::string s(t);
            while (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = std::string(trim(s.substr(1, s.size() - 2)));
            if (s.empty()) throw DataError("empty SSID");
            return s;
        }
        case DataCategory::MccMnc: {
            std::string digits;
            for (char c : t) {
                if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
            }
            if (digits.empty()) throw DataError("MCC/MNC without digits: '" + std::string(raw) + "'");
            return digits;
        }
        case DataCategory::SimCountryCode: {
            const auto s = to_lower(t);
            if (s.size() != 2 || !std::isalpha(static_cast<unsigned char>(s[0])) ||
                !std::isalpha(static_cast<unsigned char>(s[1])))
                throw DataError("SIM country code must be two letters: '" + std::string(raw) + "'");
            return s;
        }
        case DataCategory::NetType: return canonical_net_type(t);
        case DataCategory::Location: return canonical_location(t, opts);
    }
    throw DataError("unknown category");
}

CapturedProfile build_profile(const std::string& app_id, const std::vector<CaptureRecord>& records,
                              const CanonicalOptions& opts) {
    CapturedProfile p;
    p.app_id = app_id;
    for (const auto& r : records) {
        auto& set = p.values[r.category];
        const auto raw = trim(r.return_value);
        if (raw.empty()) {
            set.insert("");
            p.empty_returns.insert(r.category);
            continue;
        }
        try {
            set.insert(canonicalize(r.category, raw, opts));
        } catch (const DataError& e) {
            set.insert(std::string(raw));
            p.warnings.push_back(std::string(to_string(r.category)) + " value kept verbatim: " + e.what());
        }
    }
    std::sort(p.warnings.begin(), p.warnings.end());
    p.warnings.erase(std::unique(p.warnings.begin(), p.warnings.end()), p.warnings.end());
    return p;
}

std::string profile_to_json(const CapturedProfile& p) {
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (const auto& [c, set] : p.values) values[std::string(to_string(c))] = set;
    nlohmann::ordered_json empties = nlohmann::ordered_json::array();
    for (auto c : p.empty_returns) empties.push_back(to_string(c));
    nlohmann::ordered_json doc = {
        {"app_id", p.app_id}, {"values", values}, {"empty_returns", empties}, {"warnings", p.warnings}};
    if (p.session_seconds) doc["session_seconds"] = *p.session_seconds;
    return doc.dump(2) + "\n";
}

CapturedProfile profile_from_json(std::string_view text) {
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("profile must be a JSON object");
    CapturedProfile p;
    try {
        p.app_id = doc.at("app_id").get<std::string>();
        for (const auto& [name, list] : doc.at("values").items()) {
            const auto c = parse_data_category(name);
            if (!c) throw DataError("unknown category in profile: " + name);
            auto& set = p.values[*c];
            for (const auto& v : list) set.insert(v.get<std::string>());
            if (set.empty()) throw DataError("profile category " + name + " has no values");
        }
        for (const auto& e : doc.value("empty_returns", json::array())) {
            const auto c = parse_data_category(e.get<std::string>());
            if (!c) throw DataError("unknown category in profile: " + e.get<std::string>());
            p.empty_returns.insert(*c);
        }
        p.warnings = doc.value("warnings", std::vector<std::string>{});
        if (doc.contains("session_seconds")) {
            p.session_seconds = doc["session_seconds"].get<long long>();
            if (*p.session_seconds < 0) throw DataError("session_seconds must not be negative");
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed profile: ") + e.what());
    }
    return p;
}

// ---------------------------------------------------------------------------
// Hook configuration

HookConfig parse_hook_config(std::string_view text) {
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("hook config must be a JSON object");
    HookConfig cfg;
    cfg.version = doc.value("version", 0);
    const auto entries = doc.value("entries", json::array());
    if (!entries.is_array() || entries.empty()) throw DataError("hook config has no entries");
    std::set<std::string> seen;
    for (const auto& e : entries) {
        HookEntry h;
        try {
            h.api_signature = e.at("api_signature").get<std::string>();
            const auto name = e.at("category").get<std::string>();
            const auto c = parse_data_category(name);
            if (!c) throw DataError("hook " + h.api_signature + ": unknown category '" + name + "'");
            h.category = *c;
            h.capture = e.value("capture", std::string("return_value"));
            if (e.contains("when_argument")) {
                const auto& w = e["when_argument"];
                h.when_argument = std::make_pair(w.at("index").get<int>(), w.at("equals").get<std::string>());
            }
        } catch (const json::exception& ex) {
            throw DataError(std::string("malformed hook entry: ") + ex.what());
        }
        if (h.api_signature.find('.') == std::string::npos)
            throw DataError("hook signature must be class.method: '" + h.api_signature + "'");
        if (h.capture != "return_value") {
            const auto ok = h.capture.rfind("argument:", 0) == 0 && h.capture.size() > 9 &&
                            std::all_of(h.capture.begin() + 9, h.capture.end(),
                                        [](unsigned char ch) { return std::isdigit(ch) != 0; });
            if (!ok) throw DataError("hook " + h.api_signature + ": bad capture '" + h.capture + "'");
        }
        if (!seen.insert(h.api_signature).second)
            throw DataError("duplicate hook signature: " + h.api_signature);
        cfg.entries.push_back(std::move(h));
    }
    return cfg;
}

const HookConfig& default_hook_config() {
    static const HookConfig cfg = parse_hook_config(embedded::hooks_json);
    return cfg;
}

}  // namespace rads
