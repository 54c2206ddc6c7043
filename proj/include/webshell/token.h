#pragma once

#include <string>
#include <variant>
#include <vector>

#include "webshell/tree.h"

namespace webshell {

struct StartTagToken {
    std::string name;  // lowercase
    std::vector<Attribute> attributes;
    bool self_closing = false;
};

struct EndTagToken {
    std::string name;  // lowercase
};

struct TextToken {
    std::string raw;  // verbatim, entities not decoded
};

struct CommentToken {
    std::string raw;
};

struct DoctypeToken {
    std::string raw;
};

using Token = std::variant<StartTagToken, EndTagToken, TextToken, CommentToken, DoctypeToken>;

/// Total HTML tokenizer: any byte text is accepted, malformed constructs
/// degrade to text tokens, never throws. Content of script/style elements is
/// consumed as raw text until the matching end tag.
std::vector<Token> tokenize(std::string_view input);

} // namespace webshell
