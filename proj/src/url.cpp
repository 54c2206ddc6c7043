#include "webshell/url.h"

#include <algorithm>
#include <cctype>

namespace webshell {

namespace {

bool is_unreserved(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '-' || c == '_' || c == '.' || c == '~';
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

// RFC 3986 5.2.4
std::string remove_dot_segments(std::string_view path) {
    std::string input(path);
    std::string output;
    while (!input.empty()) {
        if (input.starts_with("../")) {
            input.erase(0, 3);
        } else if (input.starts_with("./")) {
            input.erase(0, 2);
        } else if (input.starts_with("/./")) {
            input.erase(0, 2);  // leaves "/..."
        } else if (input == "/.") {
            input = "/";
        } else if (input.starts_with("/../")) {
            input.erase(0, 3);
            auto slash = output.find_last_of('/');
            output.resize(slash == std::string::npos ? 0 : slash);
        } else if (input == "/..") {
            input = "/";
            auto slash = output.find_last_of('/');
            output.resize(slash == std::string::npos ? 0 : slash);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            size_t start = input[0] == '/' ? 1 : 0;
            size_t next = input.find('/', start);
            if (next == std::string::npos) next = input.size();
            output += input.substr(0, next);
            input.erase(0, next);
        }
    }
    return output;
}

// RFC 3986 5.3 merge
std::string merge_paths(const UrlParts& base, std::string_view ref_path) {
    if (base.path.empty()) return "/" + std::string(ref_path);
    auto slash = base.path.find_last_of('/');
    if (slash == std::string::npos) return "/" + std::string(ref_path);
    return base.path.substr(0, slash + 1) + std::string(ref_path);
}

} // namespace

std::string percent_encode(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (is_unreserved(c)) {
            out += c;
        } else {
            unsigned char u = static_cast<unsigned char>(c);
            out += '%';
            out += hex[u >> 4];
            out += hex[u & 0xF];
        }
    }
    return out;
}

std::string url_encode(const QueryParams& params) {
    std::string out;
    for (const auto& [key, value] : params) {
        if (!out.empty()) out += '&';
        out += percent_encode(key);
        out += '=';
        out += percent_encode(value);
    }
    return out;
}

std::string url_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); i++) {
        if (s[i] == '%' && i + 2 < s.size() && hex_digit(s[i + 1]) >= 0 && hex_digit(s[i + 2]) >= 0) {
            out += static_cast<char>(hex_digit(s[i + 1]) * 16 + hex_digit(s[i + 2]));
            i += 2;
        } else if (s[i] == '+') {
            out += ' ';
        } else {
            out += s[i];
        }
    }
    return out;
}

QueryParams parse_query(std::string_view query) {
    QueryParams out;
    size_t pos = 0;
    while (pos <= query.size() && !query.empty()) {
        size_t amp = query.find('&', pos);
        std::string_view pair = query.substr(pos, amp == std::string_view::npos ? std::string_view::npos : amp - pos);
        if (!pair.empty()) {
            size_t eq = pair.find('=');
            if (eq == std::string_view::npos)
                out.push_back({url_decode(pair), ""});
            else
                out.push_back({url_decode(pair.substr(0, eq)), url_decode(pair.substr(eq + 1))});
        }
        if (amp == std::string_view::npos) break;
        pos = amp + 1;
    }
    return out;
}

int UrlParts::effective_port() const {
    if (port > 0) return port;
    return scheme == "https" ? 443 : 80;
}

std::string UrlParts::path_and_query() const {
    std::string out = path.empty() ? "/" : path;
    if (!query.empty()) {
        out += '?';
        out += query;
    }
    return out;
}

std::string UrlParts::to_string() const {
    std::string out = scheme + "://" + host;
    if (port > 0) out += ":" + std::to_string(port);
    out += path.empty() ? "/" : path;
    if (!query.empty()) out += "?" + query;
    if (!fragment.empty()) out += "#" + fragment;
    return out;
}

std::optional<UrlParts> parse_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
    UrlParts parts;
    parts.scheme = lower(url.substr(0, scheme_end));
    if (parts.scheme != "http" && parts.scheme != "https") return std::nullopt;

    std::string_view rest = url.substr(scheme_end + 3);
    size_t authority_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, authority_end);
    if (authority.empty()) return std::nullopt;

    if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        std::string_view port_str = authority.substr(colon + 1);
        if (port_str.empty() || !std::all_of(port_str.begin(), port_str.end(), [](char c) {
                return std::isdigit(static_cast<unsigned char>(c));
            }))
            return std::nullopt;
        long p = std::stol(std::string(port_str));
        if (p <= 0 || p > 65535) return std::nullopt;
        parts.port = static_cast<int>(p);
        authority = authority.substr(0, colon);
    }
    if (authority.empty()) return std::nullopt;
    parts.host = lower(authority);

    if (authority_end == std::string_view::npos) {
        parts.path = "/";
        return parts;
    }
    rest = rest.substr(authority_end);
    size_t frag = rest.find('#');
    if (frag != std::string_view::npos) {
        parts.fragment = std::string(rest.substr(frag + 1));
        rest = rest.substr(0, frag);
    }
    size_t q = rest.find('?');
    if (q != std::string_view::npos) {
        parts.query = std::string(rest.substr(q + 1));
        rest = rest.substr(0, q);
    }
    parts.path = rest.empty() ? "/" : std::string(rest);
    return parts;
}

std::optional<std::string> resolve_url(const std::string& base, const std::string& href) {
    auto base_parts = parse_url(base);
    if (!base_parts) return std::nullopt;

    // scheme present on the reference?
    size_t i = 0;
    while (i < href.size() &&
           (std::isalnum(static_cast<unsigned char>(href[i])) || href[i] == '+' || href[i] == '-' || href[i] == '.'))
        i++;
    bool has_scheme = i > 0 && i < href.size() && href[i] == ':' &&
                      std::isalpha(static_cast<unsigned char>(href[0]));

    if (has_scheme) {
        auto abs = parse_url(href);
        if (!abs) return std::nullopt;  // non-http(s) scheme
        abs->fragment.clear();
        abs->path = remove_dot_segments(abs->path);
        return abs->to_string();
    }

    if (href.starts_with("#")) return std::nullopt;  // same-document fragment

    UrlParts out = *base_parts;
    out.fragment.clear();

    if (href.starts_with("//")) {
        auto abs = parse_url(out.scheme + ":" + href);
        if (!abs) return std::nullopt;
        abs->fragment.clear();
        abs->path = remove_dot_segments(abs->path);
        return abs->to_string();
    }

    std::string_view ref = href;
    std::string ref_path, ref_query;
    bool has_query = false;
    if (auto frag = ref.find('#'); frag != std::string_view::npos)
        ref = ref.substr(0, frag);
    if (auto q = ref.find('?'); q != std::string_view::npos) {
        ref_query = std::string(ref.substr(q + 1));
        has_query = true;
        ref = ref.substr(0, q);
    }
    ref_path = std::string(ref);

    if (ref_path.empty()) {
        out.query = has_query ? ref_query : base_parts->query;
        return out.to_string();
    }
    if (ref_path[0] == '/')
        out.path = remove_dot_segments(ref_path);
    else
        out.path = remove_dot_segments(merge_paths(*base_parts, ref_path));
    out.query = ref_query;
    if (out.path.empty()) out.path = "/";
    return out.to_string();
}

} // namespace webshell
