#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "webshell/tree.h"

namespace webshell {

enum class IterOrder { Dfs, Bfs };
enum class NodeFilter { Text, Comment, Tag, Any };

/// Case-insensitive order/filter words ("dfs", "BFS", "tag", ...).
std::optional<IterOrder> iter_order_from(std::string_view word);
std::optional<NodeFilter> node_filter_from(std::string_view word);

bool filter_matches(NodeFilter f, const NodeContent& content);

/// Snapshot cursor over the subtree at a node. The node sequence is fixed at
/// creation: DFS is preorder (node before children, left to right), BFS is
/// level order. The subtree root is included when it matches the filter.
/// Later tree mutations do not change the sequence, though a yielded NodeId
/// may have gone stale (dereferencing it then errors in the tree module).
class TreeIterator {
public:
    TreeIterator(const TagTree& tree, NodeId root, IterOrder order, NodeFilter filter);

    bool more() const { return cursor_ < snapshot_.size(); }
    NodeId next();  // throws "iterator exhausted" once drained
    size_t size() const { return snapshot_.size(); }

private:
    std::vector<NodeId> snapshot_;
    size_t cursor_ = 0;
};

} // namespace webshell
