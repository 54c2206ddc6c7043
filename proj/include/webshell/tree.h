#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "webshell/dtd.h"

namespace webshell {

/// Handle to a node within one TagTree. Generation-tagged so handles
/// invalidated by cut/paste/destroy are detected instead of corrupting.
struct NodeId {
    uint32_t index = 0;
    uint32_t gen = 0;
    bool operator==(const NodeId&) const = default;
};

struct Attribute {
    std::string name;                   // lowercase
    std::optional<std::string> value;   // nullopt for valueless attributes
    bool operator==(const Attribute&) const = default;
};

/// Element name plus ordered attribute list. Attribute names are unique;
/// setting an existing name updates in place, preserving first-insertion order.
struct TagData {
    std::string name;  // lowercase, non-empty
    std::vector<Attribute> attributes;

    std::optional<std::string> get_attrib(std::string_view attr_name) const;
    void set_attrib(std::string_view attr_name, std::optional<std::string> value);
    bool remove_attrib(std::string_view attr_name);

    bool operator==(const TagData&) const = default;
};

struct TextContent {
    std::string value;
    bool operator==(const TextContent&) const = default;
};

struct CommentContent {
    std::string value;
    bool operator==(const CommentContent&) const = default;
};

/// Exactly one of: text, comment, element.
using NodeContent = std::variant<TextContent, CommentContent, TagData>;

bool is_text(const NodeContent&);
bool is_comment(const NodeContent&);
bool is_element(const NodeContent&);

enum class SiblingDir { Prev, Next };

/// Arena-backed tree of text/comment/element nodes. Documents built by the
/// parser are rooted at a synthetic element named "#root" which serializes to
/// nothing; fragments made by node_create/cut/copy are rooted at their own top
/// node. Single-writer: mutation needs exclusive access.
class TagTree {
public:
    static constexpr const char* kRootName = "#root";

    /// New document tree: a single synthetic #root element.
    static TagTree document(std::shared_ptr<const Dtd> dtd = nullptr);

    /// Single-node detached tree (ws::node). Throws on an empty element name.
    static TagTree fragment(NodeContent content);

    NodeId root() const { return root_; }
    bool valid(NodeId n) const;
    bool is_document() const;  // root is the synthetic #root

    /// The DTD consulted when serializing (void-element end-tag omission).
    /// Trees built without one default to the builtin frameset DTD.
    const Dtd& dtd() const;
    void set_dtd(std::shared_ptr<const Dtd> dtd) { dtd_ = std::move(dtd); }
    std::shared_ptr<const Dtd> dtd_ptr() const;

    // -- node access ---------------------------------------------------------
    NodeContent get(NodeId n) const;
    const NodeContent& content(NodeId n) const;
    /// Replacing an element that has children with text/comment content is an
    /// error (internal nodes must be elements).
    void set(NodeId n, NodeContent content);

    std::optional<NodeId> parent(NodeId n) const;
    std::vector<NodeId> children(NodeId n) const;
    size_t child_count(NodeId n) const;
    std::optional<NodeId> sibling(NodeId n, SiblingDir dir) const;

    /// Builder primitive: append content as the last child of parent.
    NodeId append_child(NodeId parent, NodeContent content);

    // -- tree surgery --------------------------------------------------------
    /// Detach the subtree at n into its own tree. All NodeIds of the subtree
    /// become stale in this tree. The root cannot be cut.
    TagTree cut(NodeId n);

    /// Deep, independent clone of the subtree at n. Source is untouched.
    TagTree copy(NodeId n) const;

    /// Splice fragment under parent so its top node becomes the child at
    /// index (index == child_count appends). Consumes the fragment; its
    /// NodeIds do not survive. A document tree (#root) cannot be pasted.
    NodeId paste(NodeId parent, size_t index, TagTree&& fragment);

    /// Reparent n under new_parent at index, preserving subtree identity.
    /// index addresses the child list as it stands at insertion time (for a
    /// same-parent move, after n has been removed). Moving the root, moving
    /// into n's own subtree, or an out-of-range index is an error.
    void move(NodeId n, NodeId new_parent, size_t index);

    // -- serialization -------------------------------------------------------
    /// Preorder HTML serialization of the subtree at n. depth limits output to
    /// nodes at distance <= depth from n (n itself is distance 0); truncated
    /// elements still emit their own start and end tags. nullopt = unlimited.
    std::string dump(NodeId n, std::optional<int> depth = std::nullopt) const;
    std::string dump() const;  // whole tree, unlimited

    // -- auditing ------------------------------------------------------------
    size_t node_count() const { return live_count_; }
    /// Full-tree invariant audit: single root without parent, every child's
    /// parent link matches, no cycles, no orphans, every node with children is
    /// an element. Throws Error describing the first violation.
    void audit() const;

private:
    struct Slot {
        uint32_t gen = 1;
        bool live = false;
        NodeContent content;
        bool has_parent = false;
        uint32_t parent = 0;
        std::vector<uint32_t> children;
    };

    TagTree() = default;

    const Slot& slot(NodeId n) const;
    Slot& slot(NodeId n);
    uint32_t alloc(NodeContent content);
    void free_subtree(uint32_t index);
    uint32_t clone_into(TagTree& dst, uint32_t src_index) const;
    bool in_subtree(uint32_t candidate, uint32_t top) const;
    void dump_node(std::string& out, uint32_t index, std::optional<int> depth) const;

    std::vector<Slot> slots_;
    std::vector<uint32_t> free_list_;
    NodeId root_{};
    size_t live_count_ = 0;
    std::shared_ptr<const Dtd> dtd_;
};

} // namespace webshell
