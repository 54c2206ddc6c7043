#pragma once

#include <memory>
#include <string_view>

#include "webshell/dtd.h"
#include "webshell/tree.h"

namespace webshell {

/// Build a tag tree from arbitrary byte text. Total: never throws on any
/// input. Recovery is DTD-driven:
///   - a start tag listed in the open element's auto_close_on set closes it,
///   - an end tag with no matching open element is dropped,
///   - an end tag matching a non-innermost element closes the intervening
///     elements when they are all end-optional, otherwise it is dropped,
///   - end of input closes everything still open,
///   - void and self-closing elements produce childless nodes,
///   - text and comments attach to the innermost open element.
/// The result is rooted at a synthetic element named "#root".
TagTree parse(std::shared_ptr<const Dtd> dtd, std::string_view input);

/// Parser with a DTD bound at construction and an optional per-call override.
class Parser {
public:
    explicit Parser(std::shared_ptr<const Dtd> dtd = nullptr);

    const Dtd& dtd() const { return *dtd_; }
    std::shared_ptr<const Dtd> dtd_ptr() const { return dtd_; }

    TagTree parse(std::string_view input) const;
    TagTree parse(std::shared_ptr<const Dtd> dtd_override, std::string_view input) const;

private:
    std::shared_ptr<const Dtd> dtd_;
};

} // namespace webshell
