#pragma once

#include <stdexcept>
#include <string>

namespace rads {

// Exit codes shared by every CLI verb.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, external = 3 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ExitCode::usage, what) {}
};

/// Malformed or inconsistent input data.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ExitCode::data, what) {}
};

/// A remote service or external process failed.
class ExternalError : public Error {
public:
    explicit ExternalError(const std::string& what, bool transient = false)
        : Error(ExitCode::external, what), transient_(transient) {}

    [[nodiscard]] bool transient() const noexcept { return transient_; }

private:
    bool transient_;
};

}  // namespace rads
