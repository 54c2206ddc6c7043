#include <doctest.h>

#include <set>

#include "support/oracles.h"
#include "webshell/apps.h"
#include "webshell/error.h"
#include "webshell/fixture_server.h"
#include "webshell/net.h"
#include "webshell/parser.h"

using namespace webshell;

namespace {

GrepOptions fast_opts() {
    GrepOptions o;
    o.timeout = std::chrono::milliseconds(2000);
    o.timeslot = std::chrono::milliseconds(20);
    return o;
}

} // namespace

TEST_SUITE("apps") {

TEST_CASE("webgrep: cycle dedup and per-level bound") {
    testsupport::TempDir dir("grep");
    FixtureServer server;
    server.set_root(dir.path());
    int port = server.start();
    std::string base = "http://127.0.0.1:" + std::to_string(port);

    // A -> B, C ; B -> A (cycle); pattern sits in A and C
    testsupport::write_file(dir.path() / "a.html",
                            "<html>needle here <a href=\"" + base + "/b.html\">b</a>"
                            "<a href=\"" + base + "/c.html\">c</a></html>");
    testsupport::write_file(dir.path() / "b.html",
                            "<html>nothing <a href=\"" + base + "/a.html\">back</a></html>");
    testsupport::write_file(dir.path() / "c.html", "<html>NEEDLE again</html>");

    GrepResult r = webgrep(base + "/a.html", 2, "needle", fast_opts());
    CHECK(r.matches == std::vector<std::string>{base + "/a.html", base + "/c.html"});
    CHECK(r.visited == 3);
    CHECK(r.failed.empty());
    // every URL fetched exactly once
    CHECK(server.request_count("/a.html") == 1);
    CHECK(server.request_count("/b.html") == 1);
    CHECK(server.request_count("/c.html") == 1);
}

TEST_CASE("webgrep: depth 0 fetches nothing") {
    GrepResult r = webgrep("http://127.0.0.1:9/none.html", 0, "x", fast_opts());
    CHECK(r.matches.empty());
    CHECK(r.visited == 0);
    CHECK(r.failed.empty());
}

TEST_CASE("webgrep: unfetchable start lands in failed") {
    testsupport::TempDir dir("grep404");
    FixtureServer server;
    server.set_root(dir.path());
    server.set_override("/gone.html", {.status = 404});
    server.start();
    std::string url = server.base_url() + "/gone.html";
    GrepResult r = webgrep(url, 2, "x", fast_opts());
    CHECK(r.matches.empty());
    CHECK(r.visited == 0);
    CHECK(r.failed == std::vector<std::string>{url});
}

TEST_CASE("webgrep: invalid pattern errors before any fetch") {
    CHECK_THROWS_AS(webgrep("http://127.0.0.1:9/", 1, "[unclosed", fast_opts()), Error);
}

TEST_CASE("webgrep: relative links resolve against the page, raw mode keeps them") {
    testsupport::TempDir dir("greprel");
    FixtureServer server;
    server.set_root(dir.path());
    server.start();
    std::string base = server.base_url();
    testsupport::write_file(dir.path() / "site" / "index.html",
                            "<a href=\"sub.html\">s</a><a href=\"mailto:x@y\">m</a> hit");
    testsupport::write_file(dir.path() / "site" / "sub.html", "hit too");

    GrepResult resolved = webgrep(base + "/site/index.html", 2, "hit", fast_opts());
    CHECK(resolved.matches == std::vector<std::string>{base + "/site/index.html",
                                                       base + "/site/sub.html"});

    // raw hrefs: "sub.html" is not an absolute URL, so its fetch fails
    GrepOptions raw = fast_opts();
    raw.raw_hrefs = true;
    GrepResult rawr = webgrep(base + "/site/index.html", 2, "hit", raw);
    CHECK(rawr.matches == std::vector<std::string>{base + "/site/index.html"});
    CHECK(rawr.failed == std::vector<std::string>{"sub.html", "mailto:x@y"});
}

TEST_CASE("webgrep: parallel mode matches the sequential result set") {
    testsupport::TempDir dir("greppar");
    FixtureServer server;
    server.set_root(dir.path());
    int port = server.start();
    std::string base = "http://127.0.0.1:" + std::to_string(port);
    // a dozen pages all linked from the index, half matching
    std::string index = "<html>";
    for (int i = 0; i < 12; i++) {
        std::string name = "p" + std::to_string(i) + ".html";
        index += "<a href=\"" + base + "/" + name + "\">x</a>";
        testsupport::write_file(dir.path() / name,
                                i % 2 == 0 ? "<p>match-me</p>" : "<p>nope</p>");
    }
    testsupport::write_file(dir.path() / "index.html", index + "</html>");

    GrepResult seq = webgrep(base + "/index.html", 2, "match-me", fast_opts());
    GrepOptions par = fast_opts();
    par.parallel = true;
    GrepResult con = webgrep(base + "/index.html", 2, "match-me", par);
    CHECK(std::set<std::string>(seq.matches.begin(), seq.matches.end()) ==
          std::set<std::string>(con.matches.begin(), con.matches.end()));
    CHECK(seq.visited == con.visited);
}

TEST_CASE("annotate_links wraps exactly the broken anchors") {
    testsupport::TempDir dir("ann");
    FixtureServer server;
    server.set_root(dir.path());
    server.set_override("/dead.html", {.status = 404});
    server.start();
    std::string base = server.base_url();
    testsupport::write_file(dir.path() / "live1.html", "ok");
    testsupport::write_file(dir.path() / "live2.html", "ok");
    testsupport::write_file(
        dir.path() / "page.html",
        "<html><body>"
        "<a href=\"live1.html\">one</a>"
        "<a href=\"dead.html\">two</a>"
        "<a href=\"live2.html\">three</a>"
        "<a href=\"#anchor\">skip me</a>"
        "</body></html>");

    ValidationReport report = annotate_links(base + "/page.html");
    REQUIRE(report.links.size() == 4);
    CHECK(report.links[0].verdict == LinkVerdict::Valid);
    CHECK(report.links[1].verdict == LinkVerdict::Broken);
    CHECK(report.links[2].verdict == LinkVerdict::Valid);
    CHECK(report.links[3].verdict == LinkVerdict::Skipped);
    CHECK(report.links[0].resolved == base + "/live1.html");
    CHECK_FALSE(report.links[3].resolved.has_value());

    // exactly one strike, wrapping the dead anchor
    TagTree annotated = parse(dtd_builtin("frameset"), report.annotated_html);
    annotated.audit();
    auto strikes = testsupport::preorder_oracle(annotated, annotated.root(), NodeFilter::Tag);
    int strike_count = 0;
    for (NodeId n : strikes) {
        if (std::get<TagData>(annotated.content(n)).name == "strike") {
            strike_count++;
            auto kids = annotated.children(n);
            REQUIRE(kids.size() == 1);
            const TagData& inner = std::get<TagData>(annotated.content(kids[0]));
            CHECK(inner.name == "a");
            CHECK(inner.get_attrib("href") == "dead.html");
        }
    }
    CHECK(strike_count == 1);
}

TEST_CASE("annotate_links validates duplicate hrefs once") {
    testsupport::TempDir dir("anndup");
    FixtureServer server;
    server.set_root(dir.path());
    server.start();
    std::string base = server.base_url();
    testsupport::write_file(dir.path() / "t.html", "x");
    testsupport::write_file(dir.path() / "page.html",
                            "<a href=\"t.html\">a</a><a href=\"t.html\">b</a>");
    server.clear_log();
    ValidationReport report = annotate_links(base + "/page.html");
    REQUIRE(report.links.size() == 2);
    CHECK(report.links[0].verdict == LinkVerdict::Valid);
    CHECK(report.links[1].verdict == LinkVerdict::Valid);
    CHECK(server.request_count("/t.html") == 1);  // one validation request
}

TEST_CASE("annotate_links: page without anchors round-trips") {
    testsupport::TempDir dir("annempty");
    FixtureServer server;
    server.set_root(dir.path());
    server.start();
    testsupport::write_file(dir.path() / "plain.html", "<p>no links here</p>");
    ValidationReport report = annotate_links(server.base_url() + "/plain.html");
    CHECK(report.links.empty());
    TagTree original = parse(dtd_builtin("frameset"), "<p>no links here</p>");
    TagTree reparsed = parse(dtd_builtin("frameset"), report.annotated_html);
    CHECK(testsupport::equal_trees(original, reparsed));
}

TEST_CASE("annotate_links: unfetchable page propagates") {
    CHECK_THROWS(annotate_links("http://127.0.0.1:9/nope.html"));
}

TEST_CASE("webcopy mirrors and rewrites in-site links") {
    testsupport::TempDir site("copysite");
    testsupport::TempDir out("copyout");
    FixtureServer server;
    server.set_root(site.path());
    int port = server.start();
    std::string base = "http://127.0.0.1:" + std::to_string(port);

    testsupport::write_file(site.path() / "index.html",
                            "<a href=\"sub/two.html\">two</a>"
                            "<a href=\"http://offsite.example/x.html\">away</a>");
    testsupport::write_file(site.path() / "sub" / "two.html",
                            "<a href=\"../three.html\">three</a>");
    testsupport::write_file(site.path() / "three.html", "leaf");

    CopyOptions opts;
    opts.timeout = std::chrono::milliseconds(2000);
    opts.timeslot = std::chrono::milliseconds(20);
    size_t written = webcopy(base + "/index.html", 3, out.path(), opts);
    CHECK(written == 3);

    std::string index = testsupport::read_file(out.path() / "index.html");
    CHECK(index.find("href=\"sub/two.html\"") != std::string::npos);
    // off-site link untouched
    CHECK(index.find("href=\"http://offsite.example/x.html\"") != std::string::npos);
    std::string two = testsupport::read_file(out.path() / "sub" / "two.html");
    CHECK(two.find("href=\"../three.html\"") != std::string::npos);
    CHECK(std::filesystem::exists(out.path() / "three.html"));
}

TEST_CASE("webcopy: depth 0 writes nothing") {
    testsupport::TempDir out("copy0");
    CHECK(webcopy("http://127.0.0.1:9/x.html", 0, out.path()) == 0);
}

} // TEST_SUITE
