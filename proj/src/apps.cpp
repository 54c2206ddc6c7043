#include "webshell/apps.h"

#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <thread>

#include "webshell/error.h"
#include "webshell/iterate.h"
#include "webshell/net.h"
#include "webshell/parser.h"
#include "webshell/tasks.h"
#include "webshell/url.h"

namespace webshell {

namespace {

struct FetchedPage {
    std::string url;        // as requested
    std::string final_url;  // after redirects
    std::string body;
};

// Shared slot written by the fetch task before it settles; the task status
// mutex orders the write before any read.
struct FetchSlot {
    std::string final_url;
};

TaskWork fetch_work(const std::string& url, std::shared_ptr<FetchSlot> slot) {
    return [url, slot = std::move(slot)](const CancelToken& token) {
        token.checkpoint();
        FetchResult r = fetch_page(url);
        slot->final_url = r.final_url;
        return std::move(r.response.body);
    };
}

std::vector<std::string> anchor_hrefs_in_order(const TagTree& tree, std::vector<NodeId>* nodes_out = nullptr) {
    std::vector<std::string> hrefs;
    TreeIterator it(tree, tree.root(), IterOrder::Dfs, NodeFilter::Tag);
    while (it.more()) {
        NodeId n = it.next();
        const TagData& tag = std::get<TagData>(tree.content(n));
        if (tag.name != "a") continue;
        auto href = tag.get_attrib("href");
        if (!href) continue;
        hrefs.push_back(*href);
        if (nodes_out) nodes_out->push_back(n);
    }
    return hrefs;
}

// Sequential or bounded-fan-out fetch of one crawl level, results in URL order.
struct LevelFetcher {
    const GrepOptions& opts;

    struct Outcome {
        bool ok = false;
        FetchedPage page;
    };

    std::vector<Outcome> run(const std::vector<std::string>& urls) {
        std::vector<Outcome> out(urls.size());
        if (!opts.parallel) {
            for (size_t i = 0; i < urls.size(); i++) out[i] = fetch_one(urls[i]);
            return out;
        }
        size_t next = 0;
        while (next < out.size()) {
            size_t batch = std::min(static_cast<size_t>(opts.fanout), out.size() - next);
            fetch_batch(urls, next, batch, out);
            next += batch;
        }
        return out;
    }

    Outcome fetch_one(const std::string& url) {
        auto slot = std::make_shared<FetchSlot>();
        try {
            std::string body = with_timeout(fetch_work(url, slot), opts.timeout, opts.timeslot);
            return {true, {url, slot->final_url, std::move(body)}};
        } catch (const Error&) {
            return {false, {url, "", ""}};
        }
    }

    void fetch_batch(const std::vector<std::string>& urls, size_t first, size_t count,
                     std::vector<Outcome>& out) {
        struct Job {
            TaskId id;
            std::shared_ptr<FetchSlot> slot;
            std::chrono::steady_clock::time_point deadline;
            bool settled = false;
        };
        std::vector<Job> jobs(count);
        for (size_t i = 0; i < count; i++) {
            jobs[i].slot = std::make_shared<FetchSlot>();
            jobs[i].id = task_spawn(fetch_work(urls[first + i], jobs[i].slot));
            jobs[i].deadline = std::chrono::steady_clock::now() + opts.timeout;
        }
        size_t open = count;
        while (open > 0) {
            std::this_thread::sleep_for(std::min(opts.timeslot, std::chrono::milliseconds(50)));
            for (size_t i = 0; i < count; i++) {
                Job& job = jobs[i];
                if (job.settled) continue;
                TaskStatus st = task_status(job.id);
                if (st == TaskStatus::Done) {
                    out[first + i] = {true, {urls[first + i], job.slot->final_url, task_result(job.id)}};
                } else if (st == TaskStatus::Fail) {
                    out[first + i] = {false, {urls[first + i], "", ""}};
                } else if (std::chrono::steady_clock::now() >= job.deadline) {
                    out[first + i] = {false, {urls[first + i], "", ""}};
                } else {
                    continue;
                }
                task_destroy(job.id);
                job.settled = true;
                open--;
            }
        }
    }
};

} // namespace

GrepResult webgrep(const std::string& start_url, int depth, const std::string& pattern,
                   const GrepOptions& opts) {
    std::regex re;
    try {
        re = std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
        throw Error(std::string("bad pattern: ") + e.what());
    }

    GrepResult result;
    std::set<std::string> seen{start_url};
    std::vector<std::string> level{start_url};
    auto frameset = dtd_builtin("frameset");

    for (int i = 0; i < depth && !level.empty(); i++) {
        std::vector<std::string> next_level;
        LevelFetcher fetcher{opts};
        for (const auto& outcome : fetcher.run(level)) {
            if (!outcome.ok) {
                result.failed.push_back(outcome.page.url);
                continue;
            }
            result.visited++;
            TagTree tree = parse(frameset, outcome.page.body);
            for (const std::string& href : anchor_hrefs_in_order(tree)) {
                std::string link;
                if (opts.raw_hrefs) {
                    link = href;
                } else {
                    auto resolved = resolve_url(outcome.page.final_url, href);
                    if (!resolved) continue;
                    link = *resolved;
                }
                if (seen.insert(link).second) next_level.push_back(link);
            }
            if (std::regex_search(outcome.page.body, re))
                result.matches.push_back(outcome.page.url);
        }
        level = std::move(next_level);
    }
    return result;
}

const char* to_string(LinkVerdict v) {
    switch (v) {
    case LinkVerdict::Valid: return "VALID";
    case LinkVerdict::Broken: return "BROKEN";
    case LinkVerdict::Skipped: return "SKIPPED";
    }
    return "SKIPPED";
}

ValidationReport annotate_links(const std::string& page_url) {
    FetchResult fetched = fetch_page(page_url);  // unfetchable page propagates

    ValidationReport report;
    report.page_url = page_url;

    TagTree tree = parse(dtd_builtin("frameset"), fetched.response.body);
    std::vector<NodeId> anchors;
    std::vector<std::string> hrefs = anchor_hrefs_in_order(tree, &anchors);

    for (size_t i = 0; i < hrefs.size(); i++) {
        LinkEntry entry;
        entry.href = hrefs[i];
        entry.resolved = resolve_url(fetched.final_url, hrefs[i]);
        report.links.push_back(std::move(entry));
    }

    // one validation task per distinct URL, all joined before any annotation
    std::map<std::string, TaskId> running;
    for (const auto& entry : report.links) {
        if (!entry.resolved || running.contains(*entry.resolved)) continue;
        running.emplace(*entry.resolved, task_spawn([url = *entry.resolved](const CancelToken& token) {
                            token.checkpoint();
                            return std::string(validate_link(url) ? "1" : "0");
                        }));
    }
    std::map<std::string, bool> verdicts;
    for (const auto& [url, id] : running) {
        while (task_status(id) == TaskStatus::Running)
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        // validate_link is total, so the task always settles as DONE
        verdicts[url] = task_status(id) == TaskStatus::Done && task_result(id) == "1";
        task_destroy(id);
    }

    for (size_t i = 0; i < report.links.size(); i++) {
        LinkEntry& entry = report.links[i];
        if (!entry.resolved) {
            entry.verdict = LinkVerdict::Skipped;
            continue;
        }
        entry.verdict = verdicts[*entry.resolved] ? LinkVerdict::Valid : LinkVerdict::Broken;
        if (entry.verdict == LinkVerdict::Broken) {
            // wrap the anchor: paste <strike> at the anchor's position, then
            // move the anchor inside it
            NodeId anchor = anchors[i];
            NodeId parent = *tree.parent(anchor);
            auto siblings = tree.children(parent);
            size_t index = std::find(siblings.begin(), siblings.end(), anchor) - siblings.begin();
            NodeId strike = tree.paste(parent, index, TagTree::fragment(TagData{"strike", {}}));
            tree.move(anchor, strike, 0);
        }
    }

    report.annotated_html = tree.dump();
    return report;
}

namespace {

uint32_t fnv1a(std::string_view s) {
    uint32_t h = 2166136261u;
    for (unsigned char c : s) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

std::string hex8(uint32_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(8, '0');
    for (int i = 7; i >= 0; i--) {
        out[static_cast<size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

// URL path -> relative file path under the output directory.
std::filesystem::path local_path_for(const UrlParts& parts) {
    std::string path = parts.path.empty() ? "/" : parts.path;
    if (path.back() == '/') path += "index.html";
    std::filesystem::path rel;
    for (const auto& segment : std::filesystem::path(path).relative_path())
        rel /= segment == ".." ? std::filesystem::path("_") : segment;
    if (!parts.query.empty()) {
        std::filesystem::path stem = rel.stem();
        std::filesystem::path ext = rel.extension();
        rel = rel.parent_path() / (stem.string() + "_q" + hex8(fnv1a(parts.query)) + ext.string());
    }
    return rel;
}

bool same_host(const UrlParts& a, const UrlParts& b) {
    return a.scheme == b.scheme && a.host == b.host && a.effective_port() == b.effective_port();
}

} // namespace

size_t webcopy(const std::string& start_url, int depth, const std::filesystem::path& out_dir,
               const CopyOptions& opts) {
    auto start_parts = parse_url(start_url);
    if (!start_parts) throw Error("unparseable URL \"" + start_url + "\"");

    // crawl: same traversal discipline as webgrep, restricted to the start host
    std::set<std::string> seen{start_url};
    std::vector<std::string> level{start_url};
    std::vector<FetchedPage> pages;
    auto frameset = dtd_builtin("frameset");

    for (int i = 0; i < depth && !level.empty(); i++) {
        std::vector<std::string> next_level;
        for (const std::string& url : level) {
            auto slot = std::make_shared<FetchSlot>();
            std::string body;
            try {
                body = with_timeout(fetch_work(url, slot), opts.timeout, opts.timeslot);
            } catch (const Error&) {
                continue;  // skip unfetchable pages
            }
            pages.push_back({url, slot->final_url, std::move(body)});
            const FetchedPage& page = pages.back();
            TagTree tree = parse(frameset, page.body);
            for (const std::string& href : anchor_hrefs_in_order(tree)) {
                auto resolved = resolve_url(page.final_url, href);
                if (!resolved) continue;
                auto parts = parse_url(*resolved);
                if (!parts || !same_host(*parts, *start_parts)) continue;
                if (seen.insert(*resolved).second) next_level.push_back(*resolved);
            }
        }
        level = std::move(next_level);
    }

    // where each saved page lives locally; final URLs alias their requests
    std::map<std::string, std::filesystem::path> saved;
    for (const FetchedPage& page : pages) {
        auto parts = parse_url(page.url);
        if (!parts) continue;
        std::filesystem::path rel = local_path_for(*parts);
        saved[page.url] = rel;
        if (page.final_url != page.url) saved.emplace(page.final_url, rel);
    }

    size_t written = 0;
    for (const FetchedPage& page : pages) {
        std::filesystem::path rel = saved[page.url];
        TagTree tree = parse(frameset, page.body);
        std::vector<NodeId> anchors;
        std::vector<std::string> hrefs = anchor_hrefs_in_order(tree, &anchors);
        for (size_t i = 0; i < hrefs.size(); i++) {
            auto resolved = resolve_url(page.final_url, hrefs[i]);
            if (!resolved) continue;
            auto target = saved.find(*resolved);
            if (target == saved.end()) continue;  // off-site or unsaved: untouched
            std::filesystem::path relative = target->second.lexically_relative(rel.parent_path());
            TagData tag = std::get<TagData>(tree.get(anchors[i]));
            tag.set_attrib("href", relative.generic_string());
            tree.set(anchors[i], std::move(tag));
        }

        std::filesystem::path full = out_dir / rel;
        std::error_code ec;
        std::filesystem::create_directories(full.parent_path(), ec);
        std::ofstream out(full, std::ios::binary);
        if (!out) throw Error("cannot write \"" + full.string() + "\"");
        std::string html = tree.dump();
        out.write(html.data(), static_cast<std::streamsize>(html.size()));
        out.close();
        if (!out) throw Error("cannot write \"" + full.string() + "\"");
        written++;
    }
    return written;
}

} // namespace webshell
