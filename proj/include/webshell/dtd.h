#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

namespace webshell {

/// Per-element syntax facts driving parser error recovery.
struct ElementRule {
    std::string name;                     // lowercase, non-empty
    bool void_element = false;            // never has content (br, img, ...)
    bool end_optional = false;            // end tag may be omitted (p, li, ...)
    std::set<std::string> auto_close_on;  // start tags that implicitly close this element
    bool flow_container = true;           // accepts arbitrary children

    bool operator==(const ElementRule&) const = default;
};

/// A simplified document type definition: element rules plus a default rule
/// applied to unknown element names. Immutable after load; safe to share.
class Dtd {
public:
    Dtd(std::string name, std::map<std::string, ElementRule> rules, ElementRule default_rule);

    const std::string& name() const { return name_; }
    const std::map<std::string, ElementRule>& rules() const { return rules_; }
    const ElementRule& default_rule() const { return default_rule_; }

    /// Case-insensitive lookup; unknown names yield the default rule. Total.
    const ElementRule& lookup(std::string_view element_name) const;

    /// Serialize back to the line-based declaration format accepted by dtd_load.
    std::string dump() const;

    bool same_rules(const Dtd& other) const;

private:
    std::string name_;
    std::map<std::string, ElementRule> rules_;
    ElementRule default_rule_;
};

/// Parse the line-based DTD format:
///   <name> [VOID] [END_OPTIONAL] [CLOSES(a,b,...)]
/// `#` starts a comment, blank lines are ignored, and a special line
/// `DEFAULT [END_OPTIONAL]` overrides the default rule. Duplicate
/// declarations: last wins. Throws Error naming the offending line.
std::shared_ptr<const Dtd> dtd_load(std::string_view source, std::string name = "custom");

/// The bundled HTML-4-oriented DTD. The only recognized name is "frameset"
/// ("frameset.dtd" is accepted too). Unknown names throw listing builtins.
std::shared_ptr<const Dtd> dtd_builtin(std::string_view name);

/// Resolve a DTD reference the way script commands do: an existing file path
/// is loaded, otherwise the name (with any ".dtd" suffix stripped) must be a
/// builtin.
std::shared_ptr<const Dtd> dtd_resolve(const std::string& name_or_path);

} // namespace webshell
