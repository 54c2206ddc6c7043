#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace webshell {

struct QueryParam {
    std::string key;
    std::string value;
    bool operator==(const QueryParam&) const = default;
};

/// Ordered key/value pairs; order is preserved exactly in the emitted URL.
using QueryParams = std::vector<QueryParam>;

/// Percent-encode one URL component (unreserved bytes pass through, space
/// becomes %20).
std::string percent_encode(std::string_view s);

/// `k1=v1&k2=v2...` with both sides percent-encoded.
std::string url_encode(const QueryParams& params);

/// Inverse of percent encoding; also folds '+' to space (form decoding).
std::string url_decode(std::string_view s);

QueryParams parse_query(std::string_view query);

struct UrlParts {
    std::string scheme;    // lowercase
    std::string host;      // lowercase
    int port = -1;         // -1 = scheme default
    std::string path;      // as given; empty means "/"
    std::string query;     // without '?', may be empty
    std::string fragment;  // without '#', may be empty

    int effective_port() const;
    std::string path_and_query() const;
    std::string to_string() const;  // fragment included when present
};

/// Parse an absolute http/https URL. Nullopt when it does not parse or the
/// scheme is not http(s).
std::optional<UrlParts> parse_url(std::string_view url);

/// RFC 3986 relative reference resolution against an absolute http(s) base.
/// Returns nullopt for non-http(s) schemes (mailto:, javascript:, ftp:, ...)
/// and for same-document fragments ("#x"); the fragment is stripped from
/// every resolved result.
std::optional<std::string> resolve_url(const std::string& base, const std::string& href);

} // namespace webshell
