#include <doctest.h>

#include <random>

#include "support/oracles.h"
#include "webshell/parser.h"

using namespace webshell;

namespace {

const TagData& tag_of(const TagTree& t, NodeId n) {
    return std::get<TagData>(t.content(n));
}

NodeId only_element_child(const TagTree& t, NodeId n, const std::string& name) {
    for (NodeId c : t.children(n)) {
        if (is_element(t.content(c)) && tag_of(t, c).name == name) return c;
    }
    REQUIRE_MESSAGE(false, "no <" << name << "> child found");
    return {};
}

} // namespace

TEST_SUITE("parser") {

TEST_CASE("li auto-closes li: two list items") {
    TagTree t = parse(dtd_builtin("frameset"), "<ul><li>a<li>b</ul>");
    NodeId ul = only_element_child(t, t.root(), "ul");
    auto items = t.children(ul);
    REQUIRE(items.size() == 2);
    for (size_t i = 0; i < 2; i++) {
        CHECK(tag_of(t, items[i]).name == "li");
        auto kids = t.children(items[i]);
        REQUIRE(kids.size() == 1);
        CHECK(is_text(t.content(kids[0])));
    }
    CHECK(std::get<TextContent>(t.content(t.children(items[0])[0])).value == "a");
    CHECK(std::get<TextContent>(t.content(t.children(items[1])[0])).value == "b");
}

TEST_CASE("orphan end tag is dropped") {
    TagTree t = parse(dtd_builtin("frameset"), "</div>hello");
    auto kids = t.children(t.root());
    REQUIRE(kids.size() == 1);
    CHECK(std::get<TextContent>(t.content(kids[0])).value == "hello");
}

TEST_CASE("misnested b/i: stray end tags dropped, nesting preserved") {
    TagTree t = parse(dtd_builtin("frameset"), "<b><i>x</b></i>");
    NodeId b = only_element_child(t, t.root(), "b");
    NodeId i = only_element_child(t, b, "i");
    auto kids = t.children(i);
    REQUIRE(kids.size() == 1);
    CHECK(std::get<TextContent>(t.content(kids[0])).value == "x");
}

TEST_CASE("end tag closes intervening end-optional elements") {
    TagTree t = parse(dtd_builtin("frameset"), "<table><tr><td>a<td>b<tr><td>c</table>x");
    NodeId table = only_element_child(t, t.root(), "table");
    auto rows = t.children(table);
    REQUIRE(rows.size() == 2);
    CHECK(t.children(rows[0]).size() == 2);  // two cells
    CHECK(t.children(rows[1]).size() == 1);
    // the trailing text lands outside the table
    auto top = t.children(t.root());
    REQUIRE(top.size() == 2);
    CHECK(std::get<TextContent>(t.content(top[1])).value == "x");
}

TEST_CASE("void elements never hold content") {
    TagTree t = parse(dtd_builtin("frameset"), "<p>a<br>b</p>");
    NodeId p = only_element_child(t, t.root(), "p");
    auto kids = t.children(p);
    REQUIRE(kids.size() == 3);
    CHECK(is_text(t.content(kids[0])));
    CHECK(tag_of(t, kids[1]).name == "br");
    CHECK(t.children(kids[1]).empty());
    CHECK(is_text(t.content(kids[2])));
}

TEST_CASE("end tag for a void element is dropped") {
    TagTree t = parse(dtd_builtin("frameset"), "<div>a<br></br>b</div>");
    NodeId div = only_element_child(t, t.root(), "div");
    REQUIRE(t.children(div).size() == 3);
    t.audit();
}

TEST_CASE("implied end tag materialized on dump") {
    TagTree t = parse(dtd_builtin("frameset"), "<p>hi");
    CHECK(t.dump() == "<p>hi</p>");
}

TEST_CASE("void element dumps without end tag") {
    TagTree t = parse(dtd_builtin("frameset"), "<br>");
    CHECK(t.dump() == "<br>");
}

TEST_CASE("comments survive, doctype dropped") {
    TagTree t = parse(dtd_builtin("frameset"), "<!DOCTYPE html><!--note--><p>x");
    auto kids = t.children(t.root());
    REQUIRE(kids.size() == 2);
    CHECK(is_comment(t.content(kids[0])));
    CHECK(t.dump() == "<!--note--><p>x</p>");
}

TEST_CASE("text before and after html forms one tree") {
    TagTree t = parse(dtd_builtin("frameset"), "early<html><body>x</body></html>late");
    auto kids = t.children(t.root());
    REQUIRE(kids.size() == 3);
    CHECK(is_text(t.content(kids[0])));
    CHECK(tag_of(t, kids[1]).name == "html");
    CHECK(is_text(t.content(kids[2])));
    t.audit();
}

TEST_CASE("adjacent text runs merge into one node") {
    // "a " and "< b" tokenize separately but form one text node
    TagTree t = parse(dtd_builtin("frameset"), "a < b");
    auto kids = t.children(t.root());
    REQUIRE(kids.size() == 1);
    CHECK(std::get<TextContent>(t.content(kids[0])).value == "a < b");
}

TEST_CASE("per-call DTD override") {
    auto strict_li = dtd_load("li END_OPTIONAL CLOSES(li)");
    Parser parser(dtd_builtin("frameset"));
    TagTree with_default = parser.parse("<li>a<li>b");
    CHECK(with_default.children(with_default.root()).size() == 2);
    // an empty custom DTD nests the second li inside the first
    auto no_rules = dtd_load("dummy END_OPTIONAL");
    TagTree nested = parser.parse(no_rules, "<li>a<li>b");
    CHECK(nested.children(nested.root()).size() == 1);
    (void)strict_li;
}

TEST_CASE("totality and invariants on fuzzed input") {
    std::mt19937 rng(987654321);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> length(0, 4096);
    const char* htmlish = "<>abc/=\"' !-pbrli";
    std::uniform_int_distribution<size_t> pick(0, 16);
    auto frameset = dtd_builtin("frameset");
    for (int round = 0; round < 100; round++) {
        std::string input;
        int n = length(rng);
        bool taglike = round % 2 == 0;
        for (int i = 0; i < n; i++)
            input += taglike ? htmlish[pick(rng)] : static_cast<char>(byte(rng));
        TagTree t = parse(frameset, input);
        CHECK_NOTHROW(t.audit());
    }
}

TEST_CASE("dump/parse idempotence over the corpus") {
    auto frameset = dtd_builtin("frameset");
    auto files = testsupport::corpus_files();
    REQUIRE(files.size() >= 20);
    for (const auto& file : files) {
        CAPTURE(file.filename().string());
        std::string original = testsupport::read_file(file);
        std::string once = parse(frameset, original).dump();
        std::string twice = parse(frameset, once).dump();
        CHECK(once == twice);
    }
}

TEST_CASE("well-formed input round-trips to an isomorphic tree") {
    auto frameset = dtd_builtin("frameset");
    const char* doc =
        "<html><head><title>t</title></head>"
        "<body><div class=\"x\"><b>bold</b> and <i>italic</i></div></body></html>";
    TagTree first = parse(frameset, doc);
    TagTree second = parse(frameset, first.dump());
    CHECK(testsupport::equal_trees(first, second));
}

} // TEST_SUITE
