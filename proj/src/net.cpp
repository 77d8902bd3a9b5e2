#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "rads/net.hpp"

#include "rads/error.hpp"
#include "rads/util.hpp"

namespace rads::net {

std::string Url::origin() const {
    const bool default_port = (scheme == "http" && port == 80) || (scheme == "https" && port == 443);
    return scheme + "://" + host + (default_port ? "" : ":" + std::to_string(port));
}

bool looks_like_url(const std::string& s) {
    return starts_with_icase(s, "http://") || starts_with_icase(s, "https://");
}

Url parse_url(const std::string& url) {
    Url u;
    const auto sep = url.find("://");
    if (sep == std::string::npos) throw UsageError("not an absolute URL: " + url);
    u.scheme = to_lower(url.substr(0, sep));
    if (u.scheme != "http" && u.scheme != "https") throw UsageError("unsupported URL scheme: " + url);
    auto rest = url.substr(sep + 3);
    const auto slash = rest.find_first_of("/?#");
    std::string authority = rest.substr(0, slash);
    u.target = slash == std::string::npos ? "/" : rest.substr(slash);
    if (!u.target.empty() && u.target[0] != '/') u.target = "/" + u.target;
    if (const auto hash = u.target.find('#'); hash != std::string::npos) u.target.resize(hash);
    if (const auto at = authority.rfind('@'); at != std::string::npos) authority = authority.substr(at + 1);
    u.port = u.scheme == "https" ? 443 : 80;
    const auto colon = authority.rfind(':');
    if (colon != std::string::npos && authority.find(']') == std::string::npos) {
        try {
            u.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("bad port in URL: " + url);
        }
        authority.resize(colon);
    }
    if (authority.empty()) throw UsageError("URL has no host: " + url);
    u.host = authority;
    return u;
}

std::string resolve_location(const Url& base, const std::string& location) {
    if (looks_like_url(location)) return location;
    if (location.rfind("//", 0) == 0) return base.scheme + ":" + location;
    if (!location.empty() && location[0] == '/') return base.origin() + location;
    auto dir = base.target.substr(0, base.target.find('?'));
    dir = dir.substr(0, dir.rfind('/') + 1);
    return base.origin() + dir + location;
}

namespace {

httplib::Client make_client(const Url& u, const RequestOptions& opts) {
    httplib::Client cli(u.origin());
    cli.set_connection_timeout(opts.timeout);
    cli.set_read_timeout(opts.timeout);
    cli.set_write_timeout(opts.timeout);
    cli.set_follow_location(false);
    return cli;
}

httplib::Headers to_headers(const RequestOptions& opts) {
    httplib::Headers h;
    for (const auto& [k, v] : opts.headers) h.emplace(k, v);
    return h;
}

Response to_response(const httplib::Response& r, const std::string& url, int redirects) {
    Response out;
    out.status = r.status;
    out.body = r.body;
    out.content_type = r.get_header_value("Content-Type");
    out.final_url = url;
    out.redirects = redirects;
    return out;
}

}  // namespace

Response get(const std::string& url, const RequestOptions& opts) {
    std::string current = url;
    for (int redirects = 0;; ++redirects) {
        const auto u = parse_url(current);
        auto cli = make_client(u, opts);
        auto res = cli.Get(u.target, to_headers(opts));
        if (!res) {
            throw ExternalError("source unreachable: " + current + " (" + httplib::to_string(res.error()) + ")",
                                /*transient=*/true);
        }
        const bool is_redirect = res->status >= 300 && res->status < 400 && res->has_header("Location");
        if (!is_redirect) return to_response(*res, current, redirects);
        if (redirects >= opts.max_redirects) {
            throw ExternalError("too many redirects fetching " + url);
        }
        current = resolve_location(u, res->get_header_value("Location"));
    }
}

Response post(const std::string& url, const std::string& body, const std::string& content_type,
              const RequestOptions& opts) {
    const auto u = parse_url(url);
    auto cli = make_client(u, opts);
    auto res = cli.Post(u.target, to_headers(opts), body, content_type);
    if (!res) {
        throw ExternalError("request to " + url + " failed (" + httplib::to_string(res.error()) + ")",
                            /*transient=*/true);
    }
    return to_response(*res, url, 0);
}

}  // namespace rads::net
