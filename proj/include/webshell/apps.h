#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace webshell {

struct GrepOptions {
    std::chrono::milliseconds timeout{10000};  // per-page fetch budget
    std::chrono::milliseconds timeslot{500};   // polling quantum
    bool parallel = false;                     // one task per URL, fan-out below
    int fanout = 8;
    bool raw_hrefs = false;                    // crawl hrefs verbatim, no resolution
};

struct GrepResult {
    std::vector<std::string> matches;  // crawl discovery order, no duplicates
    size_t visited = 0;                // successfully fetched pages
    std::vector<std::string> failed;   // fetch errors and timeouts
};

/// Level-by-level crawl from start_url: pages less than `depth` links away are
/// fetched (each under the fetch timeout), their anchor hrefs are collected
/// through a DFS tag iterator and deduplicated before enqueueing, and every
/// fetched page whose body matches `pattern` case-insensitively is appended to
/// matches. Links found on the last fetched level are never fetched (the
/// bound is exclusive). Throws Error on an invalid pattern.
GrepResult webgrep(const std::string& start_url, int depth, const std::string& pattern,
                   const GrepOptions& opts = {});

enum class LinkVerdict { Valid, Broken, Skipped };

const char* to_string(LinkVerdict v);

struct LinkEntry {
    std::string href;                     // as written in the page
    std::optional<std::string> resolved;  // absent -> skipped
    LinkVerdict verdict = LinkVerdict::Skipped;
};

struct ValidationReport {
    std::string page_url;
    std::vector<LinkEntry> links;  // one per anchor with an href, document order
    std::string annotated_html;
};

/// Fetch and parse a page, validate every anchor's resolved target (one
/// concurrent task per distinct URL, joined before any tree mutation), and
/// wrap each broken anchor in a <strike> element. Throws when the page itself
/// cannot be fetched.
ValidationReport annotate_links(const std::string& page_url);

struct CopyOptions {
    std::chrono::milliseconds timeout{10000};
    std::chrono::milliseconds timeslot{500};
};

/// Mirror same-host pages reachable in fewer than `depth` anchor hops into
/// out_dir (URL path mapped onto the directory tree, trailing '/' becoming
/// index.html, query strings hashed into the filename). hrefs pointing to
/// pages that were saved are rewritten to relative local paths; everything
/// else is left untouched. Returns the number of files written.
size_t webcopy(const std::string& start_url, int depth, const std::filesystem::path& out_dir,
               const CopyOptions& opts = {});

} // namespace webshell
