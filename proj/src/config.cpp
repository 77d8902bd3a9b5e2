#include "rads/config.hpp"

#include "rads/error.hpp"
#include "rads/util.hpp"

#include <cstdlib>

namespace rads {

bool looks_like_secret_key(std::string_view key) {
    const auto k = to_lower(key);
    // A key naming the environment variable that holds a secret is fine.
    if (k.size() > 4 && k.compare(k.size() - 4, 4, "_env") == 0) return false;
    for (const char* word : {"secret", "password", "passwd", "token", "api_key", "apikey", "credential"}) {
        if (k.find(word) != std::string::npos) return true;
    }
    return false;
}

namespace {

std::string unquote(std::string_view v, std::size_t line_no) {
    const char q = v.front();
    std::string out;
    std::size_t i = 1;
    for (; i < v.size() && v[i] != q; ++i) {
        if (q == '"' && v[i] == '\\' && i + 1 < v.size()) {
            const char n = v[++i];
            switch (n) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                default: out.push_back(n); break;
            }
        } else {
            out.push_back(v[i]);
        }
    }
    if (i >= v.size()) throw UsageError("config line " + std::to_string(line_no) + ": unterminated string");
    const auto rest = trim(v.substr(i + 1));
    if (!rest.empty() && rest.front() != '#')
        throw UsageError("config line " + std::to_string(line_no) + ": text after closing quote");
    return out;
}

}  // namespace

Config Config::parse(std::string_view text, std::filesystem::path base_dir) {
    Config cfg;
    cfg.base_dir_ = std::move(base_dir);
    std::string section;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto where = "config line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw UsageError(where + "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw UsageError(where + "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw UsageError(where + "expected key = value");
        const auto key = std::string(trim(line.substr(0, eq)));
        if (key.empty()) throw UsageError(where + "empty key");
        const auto full = section.empty() ? key : section + "." + key;
        if (looks_like_secret_key(full))
            throw UsageError(where + "'" + full + "' looks like a secret; pass it through an environment variable");

        auto value = trim(line.substr(eq + 1));
        std::string parsed;
        if (!value.empty() && (value.front() == '"' || value.front() == '\'')) {
            parsed = unquote(value, line_no);
        } else {
            if (const auto hash = value.find(" #"); hash != std::string_view::npos) value = trim(value.substr(0, hash));
            parsed = std::string(value);
        }
        cfg.values_[full] = std::move(parsed);
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
    return parse(read_file(path), std::filesystem::absolute(path).parent_path());
}

std::optional<std::string> Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

std::optional<long long> Config::get_int(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    char* end = nullptr;
    const auto n = std::strtoll(v->c_str(), &end, 10);
    if (v->empty() || *end != '\0') throw UsageError("config key " + key + " must be an integer");
    return n;
}

std::optional<double> Config::get_double(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    char* end = nullptr;
    const auto n = std::strtod(v->c_str(), &end);
    if (v->empty() || *end != '\0') throw UsageError("config key " + key + " must be a number");
    return n;
}

std::optional<bool> Config::get_bool(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    const auto l = to_lower(*v);
    if (l == "true" || l == "yes" || l == "1") return true;
    if (l == "false" || l == "no" || l == "0") return false;
    throw UsageError("config key " + key + " must be true or false");
}

std::optional<std::filesystem::path> Config::get_path(const std::string& key) const {
    const auto v = get(key);
    if (!v || v->empty()) return std::nullopt;
    std::filesystem::path p(*v);
    if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
    return p.lexically_normal();
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

}  // namespace rads
