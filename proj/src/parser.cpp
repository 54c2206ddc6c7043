#include "webshell/parser.h"

#include "webshell/token.h"

namespace webshell {

namespace {

class TreeBuilder {
public:
    explicit TreeBuilder(std::shared_ptr<const Dtd> dtd)
        : dtd_(dtd ? std::move(dtd) : dtd_builtin("frameset")),
          tree_(TagTree::document(dtd_)) {
        open_.push_back(tree_.root());
    }

    TagTree finish() {
        open_.clear();  // end of input closes all open elements
        return std::move(tree_);
    }

    void on(const StartTagToken& t) {
        const ElementRule& rule = dtd_->lookup(t.name);
        // implied end tags: the incoming start tag closes open elements that
        // list it in auto_close_on
        while (open_.size() > 1) {
            const ElementRule& top_rule = dtd_->lookup(name_of(open_.back()));
            if (!top_rule.auto_close_on.contains(t.name)) break;
            open_.pop_back();
        }
        NodeId node = tree_.append_child(open_.back(), TagData{t.name, t.attributes});
        if (!rule.void_element && !t.self_closing)
            open_.push_back(node);
    }

    void on(const EndTagToken& t) {
        // find the nearest matching open element (never the synthetic root)
        size_t match = 0;
        for (size_t i = open_.size(); i > 1; i--) {
            if (name_of(open_[i - 1]) == t.name) {
                match = i - 1;
                break;
            }
        }
        if (match == 0) return;  // no match: drop the end tag
        if (match + 1 < open_.size()) {
            // intervening elements must all be end-optional, else drop
            for (size_t i = match + 1; i < open_.size(); i++) {
                if (!dtd_->lookup(name_of(open_[i])).end_optional) return;
            }
        }
        open_.resize(match);
    }

    void on(const TextToken& t) {
        // consecutive text children merge into one node
        auto kids = tree_.children(open_.back());
        if (!kids.empty() && is_text(tree_.content(kids.back()))) {
            auto merged = std::get<TextContent>(tree_.get(kids.back()));
            merged.value += t.raw;
            tree_.set(kids.back(), std::move(merged));
            return;
        }
        tree_.append_child(open_.back(), TextContent{t.raw});
    }

    void on(const CommentToken& t) {
        tree_.append_child(open_.back(), CommentContent{t.raw});
    }

    void on(const DoctypeToken&) {}  // dropped: nodes are text, comment, or tag

private:
    std::string name_of(NodeId n) const {
        return std::get<TagData>(tree_.content(n)).name;
    }

    std::shared_ptr<const Dtd> dtd_;
    TagTree tree_;
    std::vector<NodeId> open_;
};

} // namespace

TagTree parse(std::shared_ptr<const Dtd> dtd, std::string_view input) {
    TreeBuilder builder(std::move(dtd));
    for (const Token& tok : tokenize(input))
        std::visit([&](const auto& t) { builder.on(t); }, tok);
    return builder.finish();
}

Parser::Parser(std::shared_ptr<const Dtd> dtd)
    : dtd_(dtd ? std::move(dtd) : dtd_builtin("frameset")) {}

TagTree Parser::parse(std::string_view input) const {
    return webshell::parse(dtd_, input);
}

TagTree Parser::parse(std::shared_ptr<const Dtd> dtd_override, std::string_view input) const {
    return webshell::parse(dtd_override ? std::move(dtd_override) : dtd_, input);
}

} // namespace webshell
