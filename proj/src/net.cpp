#include "webshell/net.h"

#include <algorithm>
#include <cctype>

#include <httplib.h>

#include "webshell/error.h"

namespace webshell {

namespace {

constexpr const char* kUserAgent = "webshell/1.0";

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); i++)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

bool is_redirect(int status) {
    return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

std::string append_params(const std::string& url, const QueryParams* params) {
    if (!params || params->empty()) return url;
    std::string encoded = url_encode(*params);
    // fragments are not expected in request URLs; join query with & or ?
    char join = url.find('?') != std::string::npos ? '&' : '?';
    return url + join + encoded;
}

HttpResponse do_request(const UrlParts& parts, const std::string& method,
                        const std::string* body, const std::string* content_type,
                        const RequestOptions& opts) {
    httplib::Client client(parts.host, parts.effective_port());
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opts.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(false);  // redirect policy lives here, not in httplib

    httplib::Headers headers;
    bool have_ua = false;
    for (const auto& h : opts.headers) {
        if (iequals(h.name, "user-agent")) have_ua = true;
        headers.emplace(h.name, h.value);
    }
    if (!have_ua) headers.emplace("User-Agent", kUserAgent);

    std::string target = parts.path_and_query();
    httplib::Result result = [&] {
        if (method == "POST")
            return client.Post(target, headers, body ? *body : std::string(),
                               content_type ? *content_type : "application/x-www-form-urlencoded");
        return client.Get(target, headers);
    }();

    if (!result)
        throw Error("connection to " + parts.host + ":" + std::to_string(parts.effective_port()) +
                    " failed: " + httplib::to_string(result.error()));

    HttpResponse resp;
    resp.status = result->status;
    resp.version = result->version.empty() ? "HTTP/1.1" : result->version;
    resp.reason = result->reason;
    resp.body = result->body;
    for (const auto& [name, value] : result->headers)
        resp.headers.push_back({name, value});
    return resp;
}

FetchResult fetch_following(const std::string& url, const QueryParams* params,
                            std::string method, std::string body, const RequestOptions& opts) {
    std::string current = append_params(url, params);
    int hops = 0;
    while (true) {
        auto parts = parse_url(current);
        if (!parts) throw Error("unparseable URL \"" + current + "\"");
        const std::string content_type = "application/x-www-form-urlencoded";
        HttpResponse resp = do_request(*parts, method,
                                       method == "POST" ? &body : nullptr,
                                       method == "POST" ? &content_type : nullptr, opts);
        if (is_redirect(resp.status)) {
            auto location = resp.header("Location");
            if (!location) throw Error("redirect without Location from " + current);
            hops++;
            if (hops > opts.max_redirects)
                throw Error("too many redirects (more than " +
                            std::to_string(opts.max_redirects) + ") from " + url);
            auto next = resolve_url(current, *location);
            if (!next) throw Error("unresolvable redirect target \"" + *location + "\"");
            // 303 always becomes GET; 301/302 conventionally demote POST to GET
            if (resp.status == 303 || ((resp.status == 301 || resp.status == 302) && method == "POST")) {
                method = "GET";
                body.clear();
            }
            current = *next;
            continue;
        }
        if (resp.status < 200 || resp.status >= 300)
            throw HttpStatusError(resp.status, "HTTP status " + std::to_string(resp.status) +
                                                   " fetching " + current);
        return {std::move(resp), std::move(current)};
    }
}

} // namespace

std::string HttpResponse::status_line() const {
    return version + " " + std::to_string(status) + (reason.empty() ? "" : " " + reason);
}

std::optional<std::string> HttpResponse::header(std::string_view name) const {
    for (const auto& h : headers)
        if (iequals(h.name, name)) return h.value;
    return std::nullopt;
}

HttpResponse request_once(const std::string& url, const std::string& method,
                          const std::string* body, const std::string* content_type,
                          const RequestOptions& opts) {
    auto parts = parse_url(url);
    if (!parts) throw Error("unparseable URL \"" + url + "\"");
    return do_request(*parts, method, body, content_type, opts);
}

FetchResult fetch_page(const std::string& url, const QueryParams* params,
                       const RequestOptions& opts) {
    return fetch_following(url, params, "GET", "", opts);
}

std::string get_page(const std::string& url, const QueryParams& params, const HeaderList& headers) {
    RequestOptions opts;
    opts.headers = headers;
    return fetch_page(url, params.empty() ? nullptr : &params, opts).response.body;
}

FetchResult post_page_full(const std::string& url, const QueryParams& form,
                           const RequestOptions& opts) {
    return fetch_following(url, nullptr, "POST", url_encode(form), opts);
}

std::string post_page(const std::string& url, const QueryParams& form, const HeaderList& headers) {
    RequestOptions opts;
    opts.headers = headers;
    return post_page_full(url, form, opts).response.body;
}

bool validate_link(const std::string& url) noexcept {
    try {
        return request_once(url, "GET", nullptr, nullptr).status == 200;
    } catch (...) {
        return false;
    }
}

} // namespace webshell
