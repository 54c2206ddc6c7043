#include <doctest.h>

#include <random>

#include "webshell/url.h"

using namespace webshell;

TEST_SUITE("url") {

TEST_CASE("url_encode basics") {
    CHECK(url_encode({{"p", "CNRG"}, {"b", "3"}}) == "p=CNRG&b=3");
    CHECK(url_encode({}) == "");
    // RFC percent-encoding: space -> %20, '&' -> %26
    CHECK(url_encode({{"q", "a b&c"}}) == "q=a%20b%26c");
    CHECK(url_encode({{"k", "~x-y_z.0"}}) == "k=~x-y_z.0");
    CHECK(url_encode({{"s", "/?#=%"}}) == "s=%2F%3F%23%3D%25");
}

TEST_CASE("encode/decode round-trip") {
    std::mt19937 rng(112233);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> len(0, 64);
    for (int round = 0; round < 200; round++) {
        std::string s;
        int n = len(rng);
        for (int i = 0; i < n; i++) s += static_cast<char>(byte(rng));
        CHECK(url_decode(percent_encode(s)) == s);
    }
    CHECK(url_decode("a+b") == "a b");
    CHECK(url_decode("%2") == "%2");  // truncated escape stays literal
}

TEST_CASE("parse_query") {
    QueryParams q = parse_query("p=CNRG&b=3");
    REQUIRE(q.size() == 2);
    CHECK(q[0].key == "p");
    CHECK(q[0].value == "CNRG");
    CHECK(q[1].key == "b");
    CHECK(q[1].value == "3");
}

TEST_CASE("parse_url") {
    auto u = parse_url("http://Example.COM:8080/a/b.html?x=1#frag");
    REQUIRE(u.has_value());
    CHECK(u->scheme == "http");
    CHECK(u->host == "example.com");
    CHECK(u->port == 8080);
    CHECK(u->path == "/a/b.html");
    CHECK(u->query == "x=1");
    CHECK(u->fragment == "frag");
    CHECK(u->effective_port() == 8080);
    CHECK(u->path_and_query() == "/a/b.html?x=1");

    CHECK(parse_url("http://h")->path == "/");
    CHECK(parse_url("http://h")->effective_port() == 80);
    CHECK(parse_url("https://h/")->effective_port() == 443);

    CHECK_FALSE(parse_url("ftp://h/x").has_value());
    CHECK_FALSE(parse_url("not a url").has_value());
    CHECK_FALSE(parse_url("http://").has_value());
    CHECK_FALSE(parse_url("http://h:notaport/").has_value());
}

TEST_CASE("resolve_url: RFC 3986 merge rules") {
    // relative file against a file base
    CHECK(resolve_url("http://h/a/b.html", "c.html") == "http://h/a/c.html");
    // absolute path
    CHECK(resolve_url("http://h/a/b.html", "/x/y.html") == "http://h/x/y.html");
    // dot segments
    CHECK(resolve_url("http://h/a/b/c.html", "../d.html") == "http://h/a/d.html");
    CHECK(resolve_url("http://h/a/b/c.html", "./d.html") == "http://h/a/b/d.html");
    CHECK(resolve_url("http://h/a/b.html", "../../../up.html") == "http://h/up.html");
    // absolute reference replaces everything
    CHECK(resolve_url("http://h/a/", "http://other:81/z.html") == "http://other:81/z.html");
    // protocol-relative
    CHECK(resolve_url("http://h/a/", "//other/p.html") == "http://other/p.html");
    // query-only reference keeps the base path
    CHECK(resolve_url("http://h/a/b.html?old=1", "?new=2") == "http://h/a/b.html?new=2");
    // empty reference: the base without its fragment
    CHECK(resolve_url("http://h/a/b.html#sec", "") == "http://h/a/b.html");
    // directory base
    CHECK(resolve_url("http://h/dir/", "page.html") == "http://h/dir/page.html");
    // port preserved from base
    CHECK(resolve_url("http://h:7070/a/b.html", "c.html") == "http://h:7070/a/c.html");
}

TEST_CASE("resolve_url: absent cases") {
    CHECK_FALSE(resolve_url("http://h/", "mailto:x@y").has_value());
    CHECK_FALSE(resolve_url("http://h/", "javascript:void(0)").has_value());
    CHECK_FALSE(resolve_url("http://h/", "ftp://h/f").has_value());
    CHECK_FALSE(resolve_url("http://h/p.html", "#top").has_value());
}

TEST_CASE("resolve_url strips fragments from results") {
    CHECK(resolve_url("http://h/a/b.html", "c.html#sec") == "http://h/a/c.html");
    CHECK(resolve_url("http://h/", "http://h/x.html#frag") == "http://h/x.html");
}

} // TEST_SUITE
