#include "webshell/dtd.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "webshell/error.h"

namespace webshell {

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) i++;
        size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) i++;
        if (i > start) out.emplace_back(line.substr(start, i - start));
    }
    return out;
}

[[noreturn]] void line_error(int line_no, const std::string& msg) {
    throw Error("line " + std::to_string(line_no) + ": " + msg);
}

} // namespace

Dtd::Dtd(std::string name, std::map<std::string, ElementRule> rules, ElementRule default_rule)
    : name_(std::move(name)), rules_(std::move(rules)), default_rule_(std::move(default_rule)) {}

const ElementRule& Dtd::lookup(std::string_view element_name) const {
    auto it = rules_.find(to_lower(element_name));
    return it == rules_.end() ? default_rule_ : it->second;
}

std::string Dtd::dump() const {
    std::ostringstream out;
    auto emit = [&out](const ElementRule& r, bool is_default) {
        out << (is_default ? "DEFAULT" : r.name);
        if (r.void_element) out << " VOID";
        if (r.end_optional && !r.void_element) out << " END_OPTIONAL";
        if (!r.auto_close_on.empty()) {
            out << " CLOSES(";
            bool first = true;
            for (const auto& n : r.auto_close_on) {
                if (!first) out << ",";
                out << n;
                first = false;
            }
            out << ")";
        }
        out << "\n";
    };
    emit(default_rule_, true);
    for (const auto& [_, rule] : rules_) emit(rule, false);
    return out.str();
}

bool Dtd::same_rules(const Dtd& other) const {
    return rules_ == other.rules_ && default_rule_ == other.default_rule_;
}

std::shared_ptr<const Dtd> dtd_load(std::string_view source, std::string name) {
    std::map<std::string, ElementRule> rules;
    ElementRule default_rule;
    default_rule.name = "*";
    bool saw_declaration = false;

    int line_no = 0;
    size_t pos = 0;
    while (pos <= source.size()) {
        size_t eol = source.find('\n', pos);
        std::string_view line = source.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? source.size() + 1 : eol + 1;
        line_no++;

        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;

        bool is_default = tokens[0] == "DEFAULT";
        ElementRule rule;
        rule.name = is_default ? "*" : to_lower(tokens[0]);
        if (rule.name.empty())
            line_error(line_no, "empty element name");
        for (size_t i = 1; i < tokens.size(); i++) {
            const std::string& tok = tokens[i];
            if (tok == "VOID") {
                rule.void_element = true;
                rule.end_optional = true;  // void implies end_optional
                rule.flow_container = false;
            } else if (tok == "END_OPTIONAL") {
                rule.end_optional = true;
            } else if (tok.starts_with("CLOSES(") && tok.ends_with(")")) {
                std::string inner = tok.substr(7, tok.size() - 8);
                size_t j = 0;
                while (j <= inner.size()) {
                    size_t comma = inner.find(',', j);
                    std::string elem = to_lower(inner.substr(j, comma == std::string::npos ? std::string::npos : comma - j));
                    if (elem.empty())
                        line_error(line_no, "empty name in CLOSES list");
                    rule.auto_close_on.insert(elem);
                    if (comma == std::string::npos) break;
                    j = comma + 1;
                }
            } else {
                line_error(line_no, "unrecognized token \"" + tok + "\"");
            }
        }
        if (rule.void_element && !rule.auto_close_on.empty())
            line_error(line_no, "VOID element cannot declare CLOSES");
        if (is_default) {
            if (rule.void_element)
                line_error(line_no, "DEFAULT rule cannot be VOID");
            if (!rule.auto_close_on.empty())
                line_error(line_no, "DEFAULT rule cannot declare CLOSES");
            default_rule = rule;
        } else {
            rules[rule.name] = rule;  // last declaration wins
        }
        saw_declaration = true;
    }

    if (!saw_declaration)
        throw Error("empty DTD source");
    return std::make_shared<Dtd>(std::move(name), std::move(rules), std::move(default_rule));
}

namespace {

// HTML 4 oriented rules, expressed in the loader's own format.
constexpr std::string_view kFramesetDtdSource = R"(# builtin frameset DTD
br VOID
hr VOID
img VOID
input VOID
meta VOID
link VOID
area VOID
base VOID
col VOID
param VOID
p END_OPTIONAL CLOSES(p)
li END_OPTIONAL CLOSES(li)
dt END_OPTIONAL CLOSES(dt,dd)
dd END_OPTIONAL CLOSES(dt,dd)
tr END_OPTIONAL CLOSES(tr)
td END_OPTIONAL CLOSES(td,th,tr)
th END_OPTIONAL CLOSES(td,th,tr)
thead END_OPTIONAL
tbody END_OPTIONAL
option END_OPTIONAL CLOSES(option)
html END_OPTIONAL
head END_OPTIONAL
body END_OPTIONAL
)";

} // namespace

std::shared_ptr<const Dtd> dtd_builtin(std::string_view name) {
    if (name == "frameset" || name == "frameset.dtd") {
        static const std::shared_ptr<const Dtd> frameset = dtd_load(kFramesetDtdSource, "frameset");
        return frameset;
    }
    throw Error("unknown builtin DTD \"" + std::string(name) + "\" (available: frameset)");
}

std::shared_ptr<const Dtd> dtd_resolve(const std::string& name_or_path) {
    if (std::ifstream f{name_or_path}; f.good()) {
        std::ostringstream body;
        body << f.rdbuf();
        return dtd_load(body.str(), name_or_path);
    }
    std::string name = name_or_path;
    if (name.ends_with(".dtd")) name.resize(name.size() - 4);
    return dtd_builtin(name);
}

} // namespace webshell
