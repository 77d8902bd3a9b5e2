#pragma once

#include <chrono>
#include <map>
#include <string>

namespace rads::net {

struct Url {
    std::string scheme;  // "http" or "https"
    std::string host;
    int port = 0;
    std::string target;  // path + query, always starts with '/'

    [[nodiscard]] std::string origin() const;
};

/// Throws UsageError for anything that is not an absolute http(s) URL.
[[nodiscard]] Url parse_url(const std::string& url);
[[nodiscard]] bool looks_like_url(const std::string& s);
/// Resolves a Location header against the URL that produced it.
[[nodiscard]] std::string resolve_location(const Url& base, const std::string& location);

struct Response {
    int status = 0;
    std::string body;
    std::string content_type;
    std::string final_url;
    int redirects = 0;
};

struct RequestOptions {
    std::chrono::seconds timeout{30};
    int max_redirects = 5;
    std::map<std::string, std::string> headers;
};

/// GET following at most `max_redirects` redirects. Connection failures throw a
/// transient ExternalError; non-2xx final statuses are returned to the caller.
[[nodiscard]] Response get(const std::string& url, const RequestOptions& opts = {});
[[nodiscard]] Response post(const std::string& url, const std::string& body,
                            const std::string& content_type, const RequestOptions& opts = {});

}  // namespace rads::net
