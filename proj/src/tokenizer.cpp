#include "webshell/token.h"

#include <cctype>

namespace webshell {

namespace {

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c));
}

bool is_name_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '-' || c == '_' || c == ':';
}

bool is_space(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isspace(u);
}

char to_lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string lowered(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = to_lower(c);
    return out;
}

class Tokenizer {
public:
    explicit Tokenizer(std::string_view input) : in_(input) {}

    std::vector<Token> run() {
        while (pos_ < in_.size()) {
            if (!rawtext_end_.empty()) {
                consume_rawtext();
                continue;
            }
            if (in_[pos_] != '<') {
                pos_++;
                continue;
            }
            // decide what this '<' opens
            if (pos_ + 1 >= in_.size()) {
                pos_++;
                continue;  // trailing '<' stays literal text
            }
            char c = in_[pos_ + 1];
            if (is_name_start(c)) {
                scan_start_tag();
            } else if (c == '/' && pos_ + 2 < in_.size() && is_name_start(in_[pos_ + 2])) {
                scan_end_tag();
            } else if (c == '!') {
                scan_markup_declaration();
            } else {
                // lone '<' is literal text; it starts a fresh text token
                flush_text(pos_);
                text_start_ = pos_;
                pos_++;
            }
        }
        flush_text(in_.size());
        return std::move(tokens_);
    }

private:
    void flush_text(size_t upto) {
        if (upto > text_start_)
            tokens_.push_back(TextToken{std::string(in_.substr(text_start_, upto - text_start_))});
        text_start_ = upto;
    }

    // Emit everything from `from` to end of input as text and stop scanning.
    void degrade_rest(size_t from) {
        flush_text(from);
        text_start_ = from;
        pos_ = in_.size();
        flush_text(in_.size());
        text_start_ = in_.size();
    }

    void scan_start_tag() {
        size_t tag_start = pos_;
        size_t j = pos_ + 1;
        size_t name_start = j;
        while (j < in_.size() && is_name_char(in_[j])) j++;
        StartTagToken tok;
        tok.name = lowered(in_.substr(name_start, j - name_start));

        while (true) {
            while (j < in_.size() && is_space(in_[j])) j++;
            if (j >= in_.size()) {
                degrade_rest(tag_start);
                return;
            }
            if (in_[j] == '>') {
                j++;
                break;
            }
            if (in_[j] == '/') {
                if (j + 1 < in_.size() && in_[j + 1] == '>') {
                    tok.self_closing = true;
                    j += 2;
                    break;
                }
                j++;  // stray '/', skip
                continue;
            }
            // attribute name
            size_t an = j;
            while (j < in_.size() && !is_space(in_[j]) && in_[j] != '=' && in_[j] != '>' && in_[j] != '/')
                j++;
            std::string attr_name = lowered(in_.substr(an, j - an));
            while (j < in_.size() && is_space(in_[j])) j++;
            std::optional<std::string> value;
            if (j < in_.size() && in_[j] == '=') {
                j++;
                while (j < in_.size() && is_space(in_[j])) j++;
                if (j >= in_.size()) {
                    degrade_rest(tag_start);
                    return;
                }
                if (in_[j] == '"' || in_[j] == '\'') {
                    char quote = in_[j++];
                    size_t vs = j;
                    while (j < in_.size() && in_[j] != quote) j++;
                    if (j >= in_.size()) {
                        degrade_rest(tag_start);
                        return;
                    }
                    value = std::string(in_.substr(vs, j - vs));
                    j++;
                } else {
                    // unquoted: runs to whitespace or '>' ('/' stays in the value)
                    size_t vs = j;
                    while (j < in_.size() && !is_space(in_[j]) && in_[j] != '>') j++;
                    value = std::string(in_.substr(vs, j - vs));
                }
            }
            if (!attr_name.empty()) {
                // duplicate attribute names: last one wins
                bool replaced = false;
                for (auto& a : tok.attributes) {
                    if (a.name == attr_name) {
                        a.value = value;
                        replaced = true;
                        break;
                    }
                }
                if (!replaced) tok.attributes.push_back({std::move(attr_name), std::move(value)});
            }
        }

        flush_text(tag_start);
        bool enter_rawtext = !tok.self_closing && (tok.name == "script" || tok.name == "style");
        std::string name = tok.name;
        tokens_.push_back(std::move(tok));
        pos_ = j;
        text_start_ = j;
        if (enter_rawtext)
            rawtext_end_ = "</" + name;
    }

    void scan_end_tag() {
        size_t tag_start = pos_;
        size_t j = pos_ + 2;
        size_t name_start = j;
        while (j < in_.size() && is_name_char(in_[j])) j++;
        std::string name = lowered(in_.substr(name_start, j - name_start));
        // anything after the name up to '>' is discarded
        while (j < in_.size() && in_[j] != '>') j++;
        if (j >= in_.size()) {
            degrade_rest(tag_start);
            return;
        }
        j++;
        flush_text(tag_start);
        tokens_.push_back(EndTagToken{std::move(name)});
        pos_ = j;
        text_start_ = j;
    }

    void scan_markup_declaration() {
        size_t start = pos_;
        if (in_.compare(pos_, 4, "<!--") == 0) {
            flush_text(start);
            size_t body = pos_ + 4;
            size_t close = in_.find("-->", body);
            if (close == std::string_view::npos) {
                tokens_.push_back(CommentToken{std::string(in_.substr(body))});
                pos_ = in_.size();
            } else {
                tokens_.push_back(CommentToken{std::string(in_.substr(body, close - body))});
                pos_ = close + 3;
            }
            text_start_ = pos_;
            return;
        }
        // <!DOCTYPE ...> and other <!...> declarations: raw until '>'
        size_t close = in_.find('>', pos_ + 2);
        if (close == std::string_view::npos) {
            degrade_rest(start);
            return;
        }
        flush_text(start);
        tokens_.push_back(DoctypeToken{std::string(in_.substr(pos_, close + 1 - pos_))});
        pos_ = close + 1;
        text_start_ = pos_;
    }

    // Inside script/style: everything is text until the matching end tag.
    void consume_rawtext() {
        size_t search = pos_;
        while (true) {
            size_t lt = in_.find('<', search);
            if (lt == std::string_view::npos) {
                pos_ = in_.size();
                flush_text(in_.size());
                rawtext_end_.clear();
                return;
            }
            if (matches_ci(lt, rawtext_end_)) {
                size_t after = lt + rawtext_end_.size();
                // must be followed by whitespace, '/', or '>' to count as the end tag
                if (after >= in_.size() || is_space(in_[after]) || in_[after] == '>' || in_[after] == '/') {
                    flush_text(lt);
                    rawtext_end_.clear();
                    pos_ = lt;
                    scan_end_tag();
                    return;
                }
            }
            search = lt + 1;
        }
    }

    bool matches_ci(size_t at, std::string_view pattern) const {
        if (at + pattern.size() > in_.size()) return false;
        for (size_t k = 0; k < pattern.size(); k++)
            if (to_lower(in_[at + k]) != to_lower(pattern[k])) return false;
        return true;
    }

    std::string_view in_;
    size_t pos_ = 0;
    size_t text_start_ = 0;
    std::string rawtext_end_;
    std::vector<Token> tokens_;
};

} // namespace

std::vector<Token> tokenize(std::string_view input) {
    return Tokenizer(input).run();
}

} // namespace webshell
