#include "webshell/ws_commands.h"

#include <cctype>
#include <map>
#include <memory>
#include <mutex>

#include "webshell/apps.h"
#include "webshell/dtd.h"
#include "webshell/error.h"
#include "webshell/interp.h"
#include "webshell/iterate.h"
#include "webshell/net.h"
#include "webshell/parser.h"
#include "webshell/tasks.h"
#include "webshell/tree.h"
#include "webshell/url.h"

namespace webshell {

namespace {

// Script-level object handles. Tables are process-wide so handles can cross
// task boundaries; access is synchronized, object mutation discipline is the
// tree module's single-writer rule.
template <typename T>
class HandleTable {
public:
    explicit HandleTable(const char* prefix) : prefix_(prefix) {}

    std::string add(T value) {
        std::lock_guard lock(mu_);
        std::string handle = prefix_ + std::to_string(next_++);
        items_.emplace(handle, std::make_shared<T>(std::move(value)));
        return handle;
    }

    std::shared_ptr<T> find(const std::string& handle) {
        std::lock_guard lock(mu_);
        auto it = items_.find(handle);
        return it == items_.end() ? nullptr : it->second;
    }

    std::shared_ptr<T> need(const std::string& handle, const char* what) {
        auto p = find(handle);
        if (!p) throw Error(std::string("unknown ") + what + " handle \"" + handle + "\"");
        return p;
    }

    void remove(const std::string& handle) {
        std::lock_guard lock(mu_);
        items_.erase(handle);
    }

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<T>> items_;
    uint64_t next_ = 1;
    std::string prefix_;
};

struct NodeRef {
    std::shared_ptr<TagTree> tree;
    NodeId node;
};

struct ParserBox {
    std::shared_ptr<const Dtd> dtd;
};

struct IterBox {
    std::shared_ptr<TagTree> tree;
    TreeIterator iter;
};

struct UrlBox {
    std::string url;
};

struct StreamBox {
    std::string url;
    bool consumed = false;
};

struct ConnBox {
    HttpResponse response;
};

// Leaky singletons: detached task threads may outlive static destruction.
HandleTable<std::shared_ptr<TagTree>>& trees() {
    static auto* t = new HandleTable<std::shared_ptr<TagTree>>("tree");
    return *t;
}
HandleTable<NodeRef>& nodes() {
    static auto* t = new HandleTable<NodeRef>("node");
    return *t;
}
HandleTable<NodeRef>& tags() {
    static auto* t = new HandleTable<NodeRef>("tag");
    return *t;
}
HandleTable<ParserBox>& parsers() {
    static auto* t = new HandleTable<ParserBox>("parser");
    return *t;
}
HandleTable<IterBox>& iterators() {
    static auto* t = new HandleTable<IterBox>("iter");
    return *t;
}
HandleTable<UrlBox>& urls() {
    static auto* t = new HandleTable<UrlBox>("url");
    return *t;
}
HandleTable<StreamBox>& streams() {
    static auto* t = new HandleTable<StreamBox>("stream");
    return *t;
}
HandleTable<ConnBox>& conns() {
    static auto* t = new HandleTable<ConnBox>("conn");
    return *t;
}

// "thread<N>" handles map straight onto the task registry.
TaskId task_from_handle(const std::string& handle) {
    if (handle.starts_with("thread")) {
        TaskId id = 0;
        bool any = false;
        for (size_t i = 6; i < handle.size(); i++) {
            if (!std::isdigit(static_cast<unsigned char>(handle[i]))) return 0;
            id = id * 10 + static_cast<TaskId>(handle[i] - '0');
            any = true;
        }
        if (any) return id;
    }
    throw Error("unknown task");
}

// A node argument may be a node handle or a tree handle (meaning its root).
NodeRef resolve_node(const std::string& handle) {
    if (auto n = nodes().find(handle)) return *n;
    if (auto t = trees().find(handle)) return {*t, (*t)->root()};
    throw Error("unknown node or tree handle \"" + handle + "\"");
}

QueryParams pairs_from_list(const std::string& list_text, const char* what) {
    std::vector<std::string> items = list_split(list_text);
    if (items.size() % 2 != 0)
        throw Error(std::string(what) + " list must have an even number of elements");
    QueryParams out;
    for (size_t i = 0; i < items.size(); i += 2)
        out.push_back({items[i], items[i + 1]});
    return out;
}

HeaderList headers_from_list(const std::string& list_text) {
    HeaderList out;
    for (const auto& [k, v] : pairs_from_list(list_text, "header"))
        out.push_back({k, v});
    return out;
}

EvalResult usage(const std::string& text) {
    return EvalResult::error("wrong # args: should be \"" + text + "\"");
}

TaskWork script_work(const Interp& parent, std::string script) {
    // globals are copied here, at spawn time, in the calling task
    std::shared_ptr<Interp> child(parent.spawn_child().release());
    return [child, script = std::move(script)](const CancelToken& token) {
        child->set_cancel_token(token);
        return child->eval(script);
    };
}

// ---- command groups ----------------------------------------------------------

void register_net(Interp& in) {
    in.define("ws::getpage", [](Interp& interp, const Invocation& inv) -> EvalResult {
        if (inv.size() < 2 || inv.size() > 4)
            return usage("ws::getpage url ?queryParams? ?headers?");
        interp.cancel_token().checkpoint();
        QueryParams params;
        RequestOptions opts;
        if (inv.size() >= 3) params = pairs_from_list(inv[2], "query parameter");
        if (inv.size() == 4) opts.headers = headers_from_list(inv[3]);
        return EvalResult::ok(
            fetch_page(inv[1], params.empty() ? nullptr : &params, opts).response.body);
    });

    in.define("ws::postpage", [](Interp& interp, const Invocation& inv) -> EvalResult {
        if (inv.size() < 2 || inv.size() > 4)
            return usage("ws::postpage url ?formParams? ?headers?");
        interp.cancel_token().checkpoint();
        QueryParams form;
        RequestOptions opts;
        if (inv.size() >= 3) form = pairs_from_list(inv[2], "form parameter");
        if (inv.size() == 4) opts.headers = headers_from_list(inv[3]);
        return EvalResult::ok(post_page_full(inv[1], form, opts).response.body);
    });

    in.define("ws::validate_link", [](Interp& interp, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2) return usage("ws::validate_link url");
        interp.cancel_token().checkpoint();
        return EvalResult::ok(validate_link(inv[1]) ? "1" : "0");
    });

    in.define("ws::url", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 3 || inv[1] != "new") return usage("ws::url new urlName");
        if (!parse_url(inv[2])) return EvalResult::error("invalid URL \"" + inv[2] + "\"");
        return EvalResult::ok(urls().add({inv[2]}));
    });

    in.define("ws::stream", [](Interp& interp, const Invocation& inv) -> EvalResult {
        if (inv.size() == 4 && inv[1] == "in" && inv[2] == "url") {
            std::string url = inv[3];
            if (auto u = urls().find(url)) url = u->url;
            if (!parse_url(url)) return EvalResult::error("invalid URL \"" + url + "\"");
            return EvalResult::ok(streams().add({url, false}));
        }
        if (inv.size() == 3 && inv[1] == "read") {
            auto stream = streams().need(inv[2], "stream");
            if (stream->consumed) return EvalResult::ok("");
            interp.cancel_token().checkpoint();
            std::string body = get_page(stream->url);
            stream->consumed = true;
            return EvalResult::ok(std::move(body));
        }
        return usage("ws::stream in url urlHandle | ws::stream read streamHandle");
    });

    in.define("ws::urlconn", [](Interp& interp, const Invocation& inv) -> EvalResult {
        if (inv.size() == 3 && inv[1] == "new") {
            interp.cancel_token().checkpoint();
            // one round trip, no redirect following (Figure 5 semantics)
            return EvalResult::ok(conns().add({request_once(inv[2], "GET", nullptr, nullptr)}));
        }
        if (inv.size() == 5 && inv[1] == "get" && inv[2] == "HeaderField") {
            auto conn = conns().need(inv[4], "url connection");
            if (inv[3] == "0") return EvalResult::ok(conn->response.status_line());
            auto value = conn->response.header(inv[3]);
            return EvalResult::ok(value.value_or(""));
        }
        return usage("ws::urlconn new urlName | ws::urlconn get HeaderField field connHandle");
    });
}

void register_parsing(Interp& in) {
    in.define("ws::parser", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2 && inv.size() != 3) return usage("ws::parser dtd ?dtdName?");
        if (inv[1] != "dtd") return usage("ws::parser dtd ?dtdName?");
        std::string name = inv.size() == 3 ? inv[2] : "frameset";
        return EvalResult::ok(parsers().add({dtd_resolve(name)}));
    });

    in.define("ws::parse", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 3 && inv.size() != 4)
            return usage("ws::parse parserHandle ?dtdName? string");
        auto parser = parsers().need(inv[1], "parser");
        std::shared_ptr<const Dtd> dtd =
            inv.size() == 4 ? dtd_resolve(inv[2]) : parser->dtd;
        TagTree tree = parse(dtd, inv[inv.size() - 1]);
        return EvalResult::ok(trees().add(std::make_shared<TagTree>(std::move(tree))));
    });

    in.define("ws::dump", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 3 && inv.size() != 4)
            return usage("ws::dump string ?depth? treeOrNode");
        if (inv[1] != "string") return usage("ws::dump string ?depth? treeOrNode");
        std::optional<int> depth;
        if (inv.size() == 4) {
            try {
                depth = std::stoi(inv[2]);
            } catch (...) {
                return EvalResult::error("bad depth \"" + inv[2] + "\"");
            }
            if (*depth < 0) return EvalResult::error("bad depth \"" + inv[2] + "\"");
        }
        NodeRef ref = resolve_node(inv[inv.size() - 1]);
        return EvalResult::ok(ref.tree->dump(ref.node, depth));
    });
}

void register_tree(Interp& in) {
    in.define("ws::node", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() == 4 && inv[1] == "new") {
            NodeContent content;
            if (inv[2] == "text") content = TextContent{inv[3]};
            else if (inv[2] == "comment") content = CommentContent{inv[3]};
            else if (inv[2] == "tag") content = TagData{inv[3], {}};
            else return EvalResult::error("node type must be text, comment or tag");
            return EvalResult::ok(trees().add(std::make_shared<TagTree>(TagTree::fragment(std::move(content)))));
        }
        if (inv.size() == 4 && inv[1] == "get" && inv[2] == "content") {
            NodeRef ref = resolve_node(inv[3]);
            const NodeContent& c = ref.tree->content(ref.node);
            if (is_element(c)) return EvalResult::ok(tags().add(ref));
            if (is_text(c)) return EvalResult::ok(std::get<TextContent>(c).value);
            return EvalResult::ok(std::get<CommentContent>(c).value);
        }
        if (inv.size() == 4 && inv[1] == "get" && inv[2] == "type") {
            NodeRef ref = resolve_node(inv[3]);
            const NodeContent& c = ref.tree->content(ref.node);
            return EvalResult::ok(is_element(c) ? "tag" : is_text(c) ? "text" : "comment");
        }
        if (inv.size() == 5 && inv[1] == "set" && inv[2] == "content") {
            NodeRef ref = resolve_node(inv[3]);
            const NodeContent& c = ref.tree->content(ref.node);
            if (is_element(c))
                return EvalResult::error("cannot replace element content with text");
            if (is_text(c)) ref.tree->set(ref.node, TextContent{inv[4]});
            else ref.tree->set(ref.node, CommentContent{inv[4]});
            return EvalResult::ok(inv[4]);
        }
        return usage("ws::node new type value | ws::node get content|type node | "
                     "ws::node set content node value");
    });

    in.define("ws::tag", [](Interp&, const Invocation& inv) -> EvalResult {
        auto tag_of = [](const std::string& handle) {
            auto boxed = tags().find(handle);
            NodeRef ref = boxed ? *boxed : resolve_node(handle);
            const NodeContent& c = ref.tree->content(ref.node);
            if (!is_element(c)) throw Error("handle \"" + handle + "\" is not a tag node");
            return std::pair<NodeRef, TagData>(ref, std::get<TagData>(c));
        };
        if (inv.size() == 4 && inv[1] == "get" && inv[2] == "name")
            return EvalResult::ok(tag_of(inv[3]).second.name);
        if (inv.size() == 5 && inv[1] == "get" && inv[2] == "attrib") {
            auto value = tag_of(inv[3]).second.get_attrib(inv[4]);
            if (!value) return EvalResult::error("no such attribute \"" + inv[4] + "\"");
            return EvalResult::ok(*value);
        }
        if (inv.size() == 5 && inv[1] == "set" && inv[2] == "name") {
            auto [ref, tag] = tag_of(inv[3]);
            if (inv[4].empty()) return EvalResult::error("empty tag name");
            tag.name = inv[4];
            ref.tree->set(ref.node, std::move(tag));
            return EvalResult::ok(inv[4]);
        }
        if (inv.size() == 6 && inv[1] == "set" && inv[2] == "attrib") {
            auto [ref, tag] = tag_of(inv[3]);
            tag.set_attrib(inv[4], inv[5]);
            ref.tree->set(ref.node, std::move(tag));
            return EvalResult::ok(inv[5]);
        }
        if (inv.size() == 5 && inv[1] == "remove" && inv[2] == "attrib") {
            auto [ref, tag] = tag_of(inv[3]);
            tag.remove_attrib(inv[4]);
            ref.tree->set(ref.node, std::move(tag));
            return EvalResult::ok();
        }
        return usage("ws::tag get name|attrib tag ?attrName? | ws::tag set name|attrib tag ... | "
                     "ws::tag remove attrib tag attrName");
    });

    in.define("ws::parent", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2) return usage("ws::parent node");
        NodeRef ref = resolve_node(inv[1]);
        auto p = ref.tree->parent(ref.node);
        if (!p) return EvalResult::ok("");
        return EvalResult::ok(nodes().add({ref.tree, *p}));
    });

    in.define("ws::child", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2) return usage("ws::child node");
        NodeRef ref = resolve_node(inv[1]);
        std::vector<std::string> handles;
        for (NodeId c : ref.tree->children(ref.node))
            handles.push_back(nodes().add({ref.tree, c}));
        return EvalResult::ok(list_format(handles));
    });

    in.define("ws::sibling", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 3) return usage("ws::sibling node prev|next");
        NodeRef ref = resolve_node(inv[1]);
        SiblingDir dir;
        if (inv[2] == "prev") dir = SiblingDir::Prev;
        else if (inv[2] == "next") dir = SiblingDir::Next;
        else return EvalResult::error("direction must be prev or next");
        auto s = ref.tree->sibling(ref.node, dir);
        if (!s) return EvalResult::ok("");
        return EvalResult::ok(nodes().add({ref.tree, *s}));
    });

    in.define("ws::cut", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2) return usage("ws::cut node");
        NodeRef ref = resolve_node(inv[1]);
        TagTree frag = ref.tree->cut(ref.node);
        return EvalResult::ok(trees().add(std::make_shared<TagTree>(std::move(frag))));
    });

    in.define("ws::copy", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2) return usage("ws::copy node");
        NodeRef ref = resolve_node(inv[1]);
        TagTree frag = ref.tree->copy(ref.node);
        return EvalResult::ok(trees().add(std::make_shared<TagTree>(std::move(frag))));
    });

    in.define("ws::paste", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 4) return usage("ws::paste parentNode index fragmentTree");
        NodeRef parent = resolve_node(inv[1]);
        size_t index;
        try {
            index = std::stoul(inv[2]);
        } catch (...) {
            return EvalResult::error("bad index \"" + inv[2] + "\"");
        }
        auto frag = trees().need(inv[3], "tree");
        NodeId pasted = parent.tree->paste(parent.node, index, std::move(**frag));
        trees().remove(inv[3]);  // the fragment is consumed
        return EvalResult::ok(nodes().add({parent.tree, pasted}));
    });

    in.define("ws::move", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 4) return usage("ws::move node newParent index");
        NodeRef node = resolve_node(inv[1]);
        NodeRef parent = resolve_node(inv[2]);
        if (node.tree != parent.tree)
            return EvalResult::error("node and new parent belong to different trees");
        size_t index;
        try {
            index = std::stoul(inv[3]);
        } catch (...) {
            return EvalResult::error("bad index \"" + inv[3] + "\"");
        }
        node.tree->move(node.node, parent.node, index);
        return EvalResult::ok();
    });
}

void register_iterators(Interp& in) {
    auto make_iterator = [](const Invocation& inv) -> EvalResult {
        if (inv.size() != 5) return usage("ws::iterator tree dfs|bfs filter node");
        auto order = iter_order_from(inv[2]);
        if (!order) return EvalResult::error("unknown iteration order \"" + inv[2] + "\"");
        auto filter = node_filter_from(inv[3]);
        if (!filter) return EvalResult::error("unknown node filter \"" + inv[3] + "\"");
        NodeRef ref = resolve_node(inv[4]);
        TreeIterator iter(*ref.tree, ref.node, *order, *filter);
        return EvalResult::ok(iterators().add({ref.tree, std::move(iter)}));
    };
    auto step = [](const Invocation& inv) -> EvalResult {
        if (inv.size() != 3) return usage("ws::iterate more|next iterator");
        auto box = iterators().need(inv[2], "iterator");
        if (inv[1] == "more") return EvalResult::ok(box->iter.more() ? "1" : "0");
        if (inv[1] == "next") return EvalResult::ok(nodes().add({box->tree, box->iter.next()}));
        return EvalResult::error("iterator subcommand must be more or next");
    };

    // Figure 7 uses ws::iterator tree / ws::iterate more|next; the appendix
    // uses ws::iterator for all three.
    in.define("ws::iterator", [make_iterator, step](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() >= 2 && inv[1] == "tree") return make_iterator(inv);
        if (inv.size() >= 2 && (inv[1] == "more" || inv[1] == "next")) return step(inv);
        return usage("ws::iterator tree|more|next ...");
    });
    in.define("ws::iterate", [step](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() >= 2 && (inv[1] == "more" || inv[1] == "next")) return step(inv);
        return usage("ws::iterate more|next iterator");
    });
}

void register_threads(Interp& in) {
    in.define("ws::thread", [](Interp& interp, const Invocation& inv) -> EvalResult {
        if (inv.size() == 2 && inv[1] == "new")
            return EvalResult::ok("thread" + std::to_string(task_create()));
        if (inv.size() == 4 && inv[1] == "exec") {
            task_exec(task_from_handle(inv[2]), script_work(interp, inv[3]));
            return EvalResult::ok();
        }
        if (inv.size() == 3 && inv[1] == "status")
            return EvalResult::ok(to_string(task_status(task_from_handle(inv[2]))));
        if (inv.size() == 3 && inv[1] == "result")
            return EvalResult::ok(task_result(task_from_handle(inv[2])));
        if (inv.size() == 3 && inv[1] == "destroy") {
            task_destroy(task_from_handle(inv[2]));
            return EvalResult::ok();
        }
        return usage("ws::thread new|exec|status|result|destroy ...");
    });

    in.define("ws::timeout", [](Interp& interp, const Invocation& inv) -> EvalResult {
        if (inv.size() != 3 && inv.size() != 4)
            return usage("ws::timeout script timeout ?timeslot?");
        long long timeout, timeslot = 500;
        try {
            timeout = std::stoll(inv[2]);
            if (inv.size() == 4) timeslot = std::stoll(inv[3]);
        } catch (...) {
            return EvalResult::error("bad timeout value");
        }
        if (timeout <= 0 || timeslot <= 0)
            return EvalResult::error("timeout and timeslot must be positive");
        return EvalResult::ok(with_timeout(script_work(interp, inv[1]),
                                           std::chrono::milliseconds(timeout),
                                           std::chrono::milliseconds(timeslot)));
    });
}

void register_apps(Interp& in) {
    in.define("ws::webgrep", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 4) return usage("ws::webgrep url depth pattern");
        int depth;
        try {
            depth = std::stoi(inv[2]);
        } catch (...) {
            return EvalResult::error("bad depth \"" + inv[2] + "\"");
        }
        if (depth < 0) return EvalResult::error("bad depth \"" + inv[2] + "\"");
        GrepResult r = webgrep(inv[1], depth, inv[3]);
        return EvalResult::ok(list_format(r.matches));
    });

    in.define("ws::annotate_links", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2) return usage("ws::annotate_links url");
        return EvalResult::ok(annotate_links(inv[1]).annotated_html);
    });

    in.define("ws::webcopy", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 4) return usage("ws::webcopy url depth outDir");
        int depth;
        try {
            depth = std::stoi(inv[2]);
        } catch (...) {
            return EvalResult::error("bad depth \"" + inv[2] + "\"");
        }
        if (depth < 0) return EvalResult::error("bad depth \"" + inv[2] + "\"");
        return EvalResult::ok(std::to_string(webcopy(inv[1], depth, inv[3])));
    });
}

} // namespace

void register_ws_commands(Interp& interp) {
    register_net(interp);
    register_parsing(interp);
    register_tree(interp);
    register_iterators(interp);
    register_threads(interp);
    register_apps(interp);
}

} // namespace webshell
