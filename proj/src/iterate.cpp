#include "webshell/iterate.h"

#include <algorithm>
#include <cctype>
#include <deque>

#include "webshell/error.h"

namespace webshell {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

} // namespace

std::optional<IterOrder> iter_order_from(std::string_view word) {
    std::string w = lower(word);
    if (w == "dfs") return IterOrder::Dfs;
    if (w == "bfs") return IterOrder::Bfs;
    return std::nullopt;
}

std::optional<NodeFilter> node_filter_from(std::string_view word) {
    std::string w = lower(word);
    if (w == "text") return NodeFilter::Text;
    if (w == "comment") return NodeFilter::Comment;
    if (w == "tag") return NodeFilter::Tag;
    if (w == "any") return NodeFilter::Any;
    return std::nullopt;
}

bool filter_matches(NodeFilter f, const NodeContent& content) {
    switch (f) {
    case NodeFilter::Text: return is_text(content);
    case NodeFilter::Comment: return is_comment(content);
    case NodeFilter::Tag: return is_element(content);
    case NodeFilter::Any: return true;
    }
    return false;
}

TreeIterator::TreeIterator(const TagTree& tree, NodeId root, IterOrder order, NodeFilter filter) {
    if (!tree.valid(root)) throw Error("stale or unknown node handle");

    auto take = [&](NodeId n) {
        if (filter_matches(filter, tree.content(n)))
            snapshot_.push_back(n);
    };

    if (order == IterOrder::Dfs) {
        std::vector<NodeId> stack{root};
        while (!stack.empty()) {
            NodeId n = stack.back();
            stack.pop_back();
            take(n);
            auto kids = tree.children(n);
            for (auto it = kids.rbegin(); it != kids.rend(); ++it)
                stack.push_back(*it);
        }
    } else {
        std::deque<NodeId> queue{root};
        while (!queue.empty()) {
            NodeId n = queue.front();
            queue.pop_front();
            take(n);
            for (NodeId c : tree.children(n))
                queue.push_back(c);
        }
    }
}

NodeId TreeIterator::next() {
    if (!more()) throw Error("iterator exhausted");
    return snapshot_[cursor_++];
}

} // namespace webshell
