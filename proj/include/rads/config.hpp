#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rads {

/// TOML-style key/value file: '#' comments, [section] headers, key = value with
/// quoted strings, numbers, booleans or bare words. Keys are addressed as
/// "section.key". Keys that look like credentials are rejected: secrets come
/// from the environment only.
class Config {
public:
    Config() = default;

    [[nodiscard]] static Config parse(std::string_view text, std::filesystem::path base_dir = {});
    [[nodiscard]] static Config load(const std::filesystem::path& path);

    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }
    [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
    [[nodiscard]] std::string get_or(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] std::optional<long long> get_int(const std::string& key) const;
    [[nodiscard]] std::optional<double> get_double(const std::string& key) const;
    [[nodiscard]] std::optional<bool> get_bool(const std::string& key) const;
    /// Relative paths resolve against the directory holding the config file.
    [[nodiscard]] std::optional<std::filesystem::path> get_path(const std::string& key) const;

    /// Command-line overrides win over file values.
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    [[nodiscard]] const std::filesystem::path& base_dir() const { return base_dir_; }
    [[nodiscard]] std::vector<std::string> keys() const;

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_;
};

[[nodiscard]] bool looks_like_secret_key(std::string_view key);

}  // namespace rads
