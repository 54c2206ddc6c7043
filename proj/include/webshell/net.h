#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "webshell/url.h"

namespace webshell {

struct Header {
    std::string name;
    std::string value;
};
using HeaderList = std::vector<Header>;

struct HttpResponse {
    int status = 0;
    std::string version;  // "HTTP/1.1"
    std::string reason;   // "OK", "Not Found", ...
    HeaderList headers;
    std::string body;

    /// "HTTP/1.1 200 OK" — what ws::urlconn exposes as header field 0.
    std::string status_line() const;
    /// Case-insensitive header lookup.
    std::optional<std::string> header(std::string_view name) const;
};

struct RequestOptions {
    HeaderList headers;                               // merged over defaults
    std::chrono::milliseconds timeout{30000};         // connect + read bound
    int max_redirects = 5;
};

struct FetchResult {
    HttpResponse response;
    std::string final_url;  // after redirects
};

/// One HTTP round trip, no redirect following. Throws Error on unparseable
/// URLs and transport failures; any status is returned as-is.
HttpResponse request_once(const std::string& url, const std::string& method,
                          const std::string* body, const std::string* content_type,
                          const RequestOptions& opts = {});

/// GET with optional query parameters appended to the URL (joined with '&'
/// when it already has a query). Follows up to max_redirects redirects and
/// throws HttpStatusError when the final status is not 2xx.
FetchResult fetch_page(const std::string& url, const QueryParams* params = nullptr,
                       const RequestOptions& opts = {});

/// Figure-level routine: fetch_page and return just the body text.
std::string get_page(const std::string& url, const QueryParams& params = {},
                     const HeaderList& headers = {});

/// POST form data (application/x-www-form-urlencoded); otherwise identical to
/// get_page. 303 responses (and 301/302 after POST) are followed as GET.
FetchResult post_page_full(const std::string& url, const QueryParams& form,
                           const RequestOptions& opts = {});
std::string post_page(const std::string& url, const QueryParams& form = {},
                      const HeaderList& headers = {});

/// One GET, no redirects, true iff the status is exactly 200. Total: every
/// failure (bad URL, connection error, timeout) yields false.
bool validate_link(const std::string& url) noexcept;

} // namespace webshell
