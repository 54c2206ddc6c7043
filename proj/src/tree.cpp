#include "webshell/tree.h"

#include <algorithm>
#include <cctype>

#include "webshell/error.h"

namespace webshell {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

const TagData* as_element(const NodeContent& c) {
    return std::get_if<TagData>(&c);
}

void validate_content(const NodeContent& c) {
    if (const TagData* tag = as_element(c); tag && tag->name.empty())
        throw Error("empty tag name");
}

} // namespace

bool is_text(const NodeContent& c) { return std::holds_alternative<TextContent>(c); }
bool is_comment(const NodeContent& c) { return std::holds_alternative<CommentContent>(c); }
bool is_element(const NodeContent& c) { return std::holds_alternative<TagData>(c); }

std::optional<std::string> TagData::get_attrib(std::string_view attr_name) const {
    std::string key = lower(attr_name);
    for (const auto& a : attributes)
        if (a.name == key) return a.value ? *a.value : std::string();
    return std::nullopt;
}

void TagData::set_attrib(std::string_view attr_name, std::optional<std::string> value) {
    std::string key = lower(attr_name);
    for (auto& a : attributes) {
        if (a.name == key) {
            a.value = std::move(value);
            return;
        }
    }
    attributes.push_back({std::move(key), std::move(value)});
}

bool TagData::remove_attrib(std::string_view attr_name) {
    std::string key = lower(attr_name);
    auto it = std::find_if(attributes.begin(), attributes.end(),
                           [&](const Attribute& a) { return a.name == key; });
    if (it == attributes.end()) return false;
    attributes.erase(it);
    return true;
}

TagTree TagTree::document(std::shared_ptr<const Dtd> dtd) {
    TagTree t;
    t.dtd_ = std::move(dtd);
    uint32_t idx = t.alloc(TagData{kRootName, {}});
    t.root_ = {idx, t.slots_[idx].gen};
    return t;
}

TagTree TagTree::fragment(NodeContent content) {
    validate_content(content);
    TagTree t;
    uint32_t idx = t.alloc(std::move(content));
    t.root_ = {idx, t.slots_[idx].gen};
    return t;
}

bool TagTree::valid(NodeId n) const {
    return n.index < slots_.size() && slots_[n.index].live && slots_[n.index].gen == n.gen;
}

bool TagTree::is_document() const {
    const TagData* tag = as_element(slots_[root_.index].content);
    return tag && tag->name == kRootName;
}

const Dtd& TagTree::dtd() const {
    return *dtd_ptr();
}

std::shared_ptr<const Dtd> TagTree::dtd_ptr() const {
    return dtd_ ? dtd_ : dtd_builtin("frameset");
}

const TagTree::Slot& TagTree::slot(NodeId n) const {
    if (!valid(n)) throw Error("stale or unknown node handle");
    return slots_[n.index];
}

TagTree::Slot& TagTree::slot(NodeId n) {
    if (!valid(n)) throw Error("stale or unknown node handle");
    return slots_[n.index];
}

uint32_t TagTree::alloc(NodeContent content) {
    uint32_t idx;
    if (!free_list_.empty()) {
        idx = free_list_.back();
        free_list_.pop_back();
    } else {
        idx = static_cast<uint32_t>(slots_.size());
        slots_.emplace_back();
    }
    Slot& s = slots_[idx];
    s.live = true;
    s.content = std::move(content);
    s.has_parent = false;
    s.parent = 0;
    s.children.clear();
    live_count_++;
    return idx;
}

NodeContent TagTree::get(NodeId n) const {
    return slot(n).content;
}

const NodeContent& TagTree::content(NodeId n) const {
    return slot(n).content;
}

void TagTree::set(NodeId n, NodeContent content) {
    validate_content(content);
    Slot& s = slot(n);
    if (!s.children.empty() && !is_element(content))
        throw Error("cannot set non-element content on a node with children");
    s.content = std::move(content);
}

std::optional<NodeId> TagTree::parent(NodeId n) const {
    const Slot& s = slot(n);
    if (!s.has_parent) return std::nullopt;
    return NodeId{s.parent, slots_[s.parent].gen};
}

std::vector<NodeId> TagTree::children(NodeId n) const {
    const Slot& s = slot(n);
    std::vector<NodeId> out;
    out.reserve(s.children.size());
    for (uint32_t c : s.children) out.push_back({c, slots_[c].gen});
    return out;
}

size_t TagTree::child_count(NodeId n) const {
    return slot(n).children.size();
}

std::optional<NodeId> TagTree::sibling(NodeId n, SiblingDir dir) const {
    const Slot& s = slot(n);
    if (!s.has_parent) return std::nullopt;
    const auto& sibs = slots_[s.parent].children;
    auto it = std::find(sibs.begin(), sibs.end(), n.index);
    size_t pos = static_cast<size_t>(it - sibs.begin());
    if (dir == SiblingDir::Prev) {
        if (pos == 0) return std::nullopt;
        return NodeId{sibs[pos - 1], slots_[sibs[pos - 1]].gen};
    }
    if (pos + 1 >= sibs.size()) return std::nullopt;
    return NodeId{sibs[pos + 1], slots_[sibs[pos + 1]].gen};
}

NodeId TagTree::append_child(NodeId parent, NodeContent content) {
    validate_content(content);
    if (!is_element(slot(parent).content))
        throw Error("cannot attach children to a non-element node");
    uint32_t idx = alloc(std::move(content));
    Slot& p = slots_[parent.index];  // alloc may have reallocated slots_
    p.children.push_back(idx);
    slots_[idx].has_parent = true;
    slots_[idx].parent = parent.index;
    return {idx, slots_[idx].gen};
}

void TagTree::free_subtree(uint32_t index) {
    std::vector<uint32_t> stack{index};
    while (!stack.empty()) {
        uint32_t i = stack.back();
        stack.pop_back();
        for (uint32_t c : slots_[i].children) stack.push_back(c);
        Slot& s = slots_[i];
        s.live = false;
        s.gen++;  // invalidate outstanding handles
        s.children.clear();
        s.content = TextContent{};
        s.has_parent = false;
        free_list_.push_back(i);
        live_count_--;
    }
}

uint32_t TagTree::clone_into(TagTree& dst, uint32_t src_index) const {
    struct Item {
        uint32_t src;
        uint32_t dst_parent;
        bool has_parent;
    };
    std::vector<Item> stack{{src_index, 0, false}};
    uint32_t top = 0;
    // Preorder with an explicit stack; children pushed reversed to keep order.
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        uint32_t nd = dst.alloc(slots_[it.src].content);
        if (it.has_parent) {
            dst.slots_[nd].has_parent = true;
            dst.slots_[nd].parent = it.dst_parent;
            dst.slots_[it.dst_parent].children.push_back(nd);
        } else {
            top = nd;
        }
        const auto& kids = slots_[it.src].children;
        for (auto r = kids.rbegin(); r != kids.rend(); ++r)
            stack.push_back({*r, nd, true});
    }
    return top;
}

TagTree TagTree::cut(NodeId n) {
    Slot& s = slot(n);
    if (n == root_) throw Error("cannot cut the root node");
    TagTree frag;
    frag.dtd_ = dtd_;
    uint32_t top = clone_into(frag, n.index);
    frag.root_ = {top, frag.slots_[top].gen};
    auto& sibs = slots_[s.parent].children;
    sibs.erase(std::find(sibs.begin(), sibs.end(), n.index));
    free_subtree(n.index);
    return frag;
}

TagTree TagTree::copy(NodeId n) const {
    slot(n);  // validate
    TagTree frag;
    frag.dtd_ = dtd_;
    uint32_t top = clone_into(frag, n.index);
    frag.root_ = {top, frag.slots_[top].gen};
    return frag;
}

NodeId TagTree::paste(NodeId parent, size_t index, TagTree&& fragment) {
    if (&fragment == this) throw Error("cannot paste a tree into itself");
    Slot& p = slot(parent);
    if (!is_element(p.content))
        throw Error("cannot paste under a non-element node");
    if (index > p.children.size())
        throw Error("paste index out of range");
    if (!fragment.valid(fragment.root_))
        throw Error("fragment already consumed");
    if (fragment.is_document())
        throw Error("cannot paste a document tree");
    uint32_t top = fragment.clone_into(*this, fragment.root_.index);
    Slot& p2 = slots_[parent.index];
    p2.children.insert(p2.children.begin() + static_cast<ptrdiff_t>(index), top);
    slots_[top].has_parent = true;
    slots_[top].parent = parent.index;
    NodeId id{top, slots_[top].gen};
    fragment.free_subtree(fragment.root_.index);  // consume
    return id;
}

bool TagTree::in_subtree(uint32_t candidate, uint32_t top) const {
    uint32_t cur = candidate;
    while (true) {
        if (cur == top) return true;
        if (!slots_[cur].has_parent) return false;
        cur = slots_[cur].parent;
    }
}

void TagTree::move(NodeId n, NodeId new_parent, size_t index) {
    slot(n);
    Slot& np = slot(new_parent);
    if (n == root_) throw Error("cannot move the root node");
    if (!is_element(np.content))
        throw Error("cannot move under a non-element node");
    if (in_subtree(new_parent.index, n.index))
        throw Error("move would create a cycle");
    size_t limit = np.children.size();
    if (slots_[n.index].parent == new_parent.index) limit--;
    if (index > limit) throw Error("move index out of range");

    auto& old_sibs = slots_[slots_[n.index].parent].children;
    old_sibs.erase(std::find(old_sibs.begin(), old_sibs.end(), n.index));
    auto& new_sibs = slots_[new_parent.index].children;
    new_sibs.insert(new_sibs.begin() + static_cast<ptrdiff_t>(index), n.index);
    slots_[n.index].parent = new_parent.index;
}

namespace {

void append_escaped_attr_value(std::string& out, const std::string& value) {
    for (char c : value) {
        if (c == '"')
            out += "&quot;";
        else
            out += c;
    }
}

} // namespace

void TagTree::dump_node(std::string& out, uint32_t index, std::optional<int> depth) const {
    // Explicit event stack: deep fuzz trees would overflow recursion.
    struct Event {
        uint32_t index;
        int remaining;   // -1 = unlimited
        bool closing;
    };
    std::vector<Event> stack{{index, depth ? *depth : -1, false}};
    while (!stack.empty()) {
        Event ev = stack.back();
        stack.pop_back();
        const Slot& s = slots_[ev.index];
        const TagData* tag = as_element(s.content);

        if (ev.closing) {
            out += "</";
            out += tag->name;
            out += '>';
            continue;
        }

        bool synthetic_root = tag && tag->name == kRootName;
        if (tag && !synthetic_root) {
            out += '<';
            out += tag->name;
            for (const auto& a : tag->attributes) {
                out += ' ';
                out += a.name;
                if (a.value) {
                    out += "=\"";
                    append_escaped_attr_value(out, *a.value);
                    out += '"';
                }
            }
            out += '>';
            bool omit_end = s.children.empty() && dtd().lookup(tag->name).void_element;
            if (!omit_end)
                stack.push_back({ev.index, 0, true});
        } else if (is_text(s.content)) {
            out += std::get<TextContent>(s.content).value;
        } else if (is_comment(s.content)) {
            out += "<!--";
            out += std::get<CommentContent>(s.content).value;
            out += "-->";
        }

        if (ev.remaining != 0) {
            int next = ev.remaining < 0 ? -1 : ev.remaining - 1;
            for (auto r = s.children.rbegin(); r != s.children.rend(); ++r)
                stack.push_back({*r, next, false});
        }
    }
}

std::string TagTree::dump(NodeId n, std::optional<int> depth) const {
    slot(n);
    if (depth && *depth < 0) throw Error("negative dump depth");
    std::string out;
    dump_node(out, n.index, depth);
    return out;
}

std::string TagTree::dump() const {
    return dump(root_);
}

void TagTree::audit() const {
    if (!slots_[root_.index].live || slots_[root_.index].gen != root_.gen)
        throw Error("audit: root is not live");
    if (slots_[root_.index].has_parent)
        throw Error("audit: root has a parent");

    std::vector<bool> visited(slots_.size(), false);
    std::vector<uint32_t> stack{root_.index};
    size_t count = 0;
    while (!stack.empty()) {
        uint32_t i = stack.back();
        stack.pop_back();
        if (visited[i])
            throw Error("audit: node reachable twice (cycle or shared child)");
        visited[i] = true;
        count++;
        const Slot& s = slots_[i];
        if (!s.live)
            throw Error("audit: dead node reachable");
        if (!s.children.empty() && !is_element(s.content))
            throw Error("audit: internal node is not an element");
        for (uint32_t c : s.children) {
            if (c >= slots_.size() || !slots_[c].live)
                throw Error("audit: child link to dead node");
            if (!slots_[c].has_parent || slots_[c].parent != i)
                throw Error("audit: child's parent link does not match");
            stack.push_back(c);
        }
    }
    if (count != live_count_)
        throw Error("audit: orphaned nodes present");
}

} // namespace webshell
