#pragma once

#include "rads/util.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <system_error>

namespace rads::test {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(RADS_FIXTURE_DIR) / rel; }

inline std::filesystem::path data_file(const std::string& rel) { return std::filesystem::path(RADS_DATA_DIR) / rel; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        auto tmpl = (std::filesystem::temp_directory_path() / "rads-test-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

    std::filesystem::path write(const std::string& rel, std::string_view content) const {
        const auto p = path_ / rel;
        write_file(p, content);
        return p;
    }

private:
    std::filesystem::path path_;
};

}  // namespace rads::test
