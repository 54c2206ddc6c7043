#include "webshell/interp.h"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cstdio>
#include <regex>

namespace webshell {

namespace {

constexpr int kMaxEvalDepth = 500;

bool is_word_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }
bool is_cmd_end(char c) { return c == '\n' || c == ';'; }

bool is_varname_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_';
}

char backslash_subst(char c) {
    switch (c) {
    case 'n': return '\n';
    case 't': return '\t';
    case 'r': return '\r';
    case 'a': return '\a';
    case 'b': return '\b';
    case 'f': return '\f';
    case 'v': return '\v';
    default: return c;
    }
}

bool try_int(std::string_view s, long long& out) {
    if (s.empty()) return false;
    size_t i = 0;
    bool neg = false;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        i = 1;
        if (i == s.size()) return false;
    }
    long long v = 0;
    for (; i < s.size(); i++) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        int d = s[i] - '0';
        if (__builtin_mul_overflow(v, 10LL, &v)) return false;
        if (neg ? __builtin_sub_overflow(v, d, &v) : __builtin_add_overflow(v, d, &v)) return false;
    }
    out = v;
    return true;
}

} // namespace

// ---- list values ------------------------------------------------------------

std::vector<std::string> list_split(std::string_view text) {
    std::vector<std::string> out;
    size_t i = 0;
    auto is_sep = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r';
    };
    while (i < text.size()) {
        while (i < text.size() && is_sep(text[i])) i++;
        if (i >= text.size()) break;
        std::string elem;
        if (text[i] == '{') {
            int depth = 1;
            size_t j = i + 1;
            for (; j < text.size() && depth > 0; j++) {
                if (text[j] == '\\' && j + 1 < text.size()) {
                    j++;
                } else if (text[j] == '{') {
                    depth++;
                } else if (text[j] == '}') {
                    depth--;
                }
            }
            if (depth != 0) throw ScriptError("unmatched open brace in list");
            elem = std::string(text.substr(i + 1, j - i - 2));
            i = j;
            if (i < text.size() && !is_sep(text[i]))
                throw ScriptError("list element in braces followed by extra characters");
        } else if (text[i] == '"') {
            size_t j = i + 1;
            bool closed = false;
            for (; j < text.size(); j++) {
                if (text[j] == '\\' && j + 1 < text.size()) {
                    elem += backslash_subst(text[j + 1]);
                    j++;
                } else if (text[j] == '"') {
                    closed = true;
                    j++;
                    break;
                } else {
                    elem += text[j];
                }
            }
            if (!closed) throw ScriptError("unmatched quote in list");
            i = j;
            if (i < text.size() && !is_sep(text[i]))
                throw ScriptError("list element in quotes followed by extra characters");
        } else {
            size_t j = i;
            for (; j < text.size() && !is_sep(text[j]); j++) {
                if (text[j] == '\\' && j + 1 < text.size()) {
                    elem += backslash_subst(text[j + 1]);
                    j++;
                } else {
                    elem += text[j];
                }
            }
            i = j;
        }
        out.push_back(std::move(elem));
    }
    return out;
}

namespace {

bool braces_balanced(std::string_view s) {
    int depth = 0;
    for (size_t i = 0; i < s.size(); i++) {
        if (s[i] == '\\') {
            i++;
        } else if (s[i] == '{') {
            depth++;
        } else if (s[i] == '}') {
            if (--depth < 0) return false;
        }
    }
    return depth == 0;
}

} // namespace

std::string list_element(std::string_view elem) {
    static constexpr std::string_view specials = " \t\n\r{}\"[]$;\\";
    bool needs_quote = elem.empty() ||
                       elem.find_first_of(specials) != std::string_view::npos;
    if (!needs_quote) return std::string(elem);
    if (braces_balanced(elem) && !elem.ends_with("\\"))
        return "{" + std::string(elem) + "}";
    std::string out;
    for (char c : elem) {
        switch (c) {
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        case ' ': case '{': case '}': case '"':
        case '[': case ']': case '$': case ';': case '\\':
            out += '\\';
            out += c;
            break;
        default: out += c;
        }
    }
    return out;
}

std::string list_format(const std::vector<std::string>& elems) {
    std::string out;
    for (const auto& e : elems) {
        if (!out.empty()) out += ' ';
        out += list_element(e);
    }
    return out;
}

// ---- parsed representation ----------------------------------------------------

struct Part {
    enum Kind { Literal, VarSub, CmdSub } kind = Literal;
    std::string text;          // literal text / variable name / bracket script
    bool has_index = false;    // VarSub: $name(index)
    std::vector<Part> index;
};

struct ScriptWord {
    enum Kind { Bare, Quoted, Braced } kind = Bare;
    std::vector<Part> parts;
    std::string src;  // unsubstituted source; for Braced, the inner text
    int line = 1;
};

struct ScriptCommand {
    std::vector<ScriptWord> words;
    int line = 1;
};

struct ScriptProgram {
    std::vector<ScriptCommand> commands;
};

namespace {

/// Iterative script reader. Bracketed command substitutions are captured as
/// raw text and parsed lazily when substituted.
class ScriptReader {
public:
    explicit ScriptReader(std::string_view src) : s_(src) {}

    ScriptProgram run() {
        ScriptProgram script;
        ScriptCommand cmd;
        cmd.line = line_;
        while (true) {
            skip_blanks();
            if (pos_ >= s_.size()) break;
            char c = s_[pos_];
            if (is_cmd_end(c)) {
                if (c == '\n') line_++;
                pos_++;
                if (!cmd.words.empty()) {
                    script.commands.push_back(std::move(cmd));
                    cmd = {};
                }
                cmd.line = line_;
                continue;
            }
            if (c == '#' && cmd.words.empty()) {
                while (pos_ < s_.size() && s_[pos_] != '\n') pos_++;
                continue;
            }
            cmd.words.push_back(read_word());
        }
        if (!cmd.words.empty()) script.commands.push_back(std::move(cmd));
        return script;
    }

private:
    [[noreturn]] void fail(const std::string& msg, int line) {
        throw ScriptError("line " + std::to_string(line) + ": " + msg, line);
    }

    void skip_blanks() {
        while (pos_ < s_.size()) {
            if (is_word_space(s_[pos_])) {
                pos_++;
            } else if (s_[pos_] == '\\' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '\n') {
                line_++;
                pos_ += 2;  // line continuation
            } else {
                break;
            }
        }
    }

    bool at_word_end() const {
        return pos_ >= s_.size() || is_word_space(s_[pos_]) || is_cmd_end(s_[pos_]);
    }

    ScriptWord read_word() {
        ScriptWord w;
        w.line = line_;
        size_t start = pos_;
        if (s_[pos_] == '{') {
            w.kind = ScriptWord::Braced;
            std::string inner = read_braced();
            if (!at_word_end()) fail("extra characters after close-brace", w.line);
            w.src = inner;
            Part p;
            p.text = std::move(inner);
            w.parts.push_back(std::move(p));
            return w;
        }
        if (s_[pos_] == '"') {
            w.kind = ScriptWord::Quoted;
            pos_++;
            read_parts(w.parts, [this] { return pos_ < s_.size() && s_[pos_] == '"'; }, true, w.line);
            if (pos_ >= s_.size()) fail("missing closing quote", w.line);
            pos_++;  // closing quote
            if (!at_word_end()) fail("extra characters after close-quote", w.line);
            w.src = std::string(s_.substr(start, pos_ - start));
            return w;
        }
        w.kind = ScriptWord::Bare;
        read_parts(w.parts, [this] { return at_word_end(); }, false, w.line);
        w.src = std::string(s_.substr(start, pos_ - start));
        return w;
    }

    // Shared by quoted words, bare words and array indices.
    template <typename Stop>
    void read_parts(std::vector<Part>& parts, Stop stop, bool in_quotes, int word_line) {
        std::string lit;
        auto flush = [&] {
            if (!lit.empty()) {
                Part p;
                p.text = std::move(lit);
                lit.clear();
                parts.push_back(std::move(p));
            }
        };
        while (!stop()) {
            if (pos_ >= s_.size()) {
                if (in_quotes) fail("missing closing quote", word_line);
                break;
            }
            char c = s_[pos_];
            if (c == '\\') {
                if (pos_ + 1 >= s_.size()) {
                    lit += '\\';
                    pos_++;
                    continue;
                }
                char next = s_[pos_ + 1];
                if (next == '\n') {
                    lit += ' ';
                    line_++;
                } else {
                    lit += backslash_subst(next);
                }
                pos_ += 2;
                continue;
            }
            if (c == '$') {
                Part var;
                if (read_dollar(var)) {
                    flush();
                    parts.push_back(std::move(var));
                } else {
                    lit += '$';
                    pos_++;
                }
                continue;
            }
            if (c == '[') {
                flush();
                Part p;
                p.kind = Part::CmdSub;
                p.text = read_bracket();
                parts.push_back(std::move(p));
                continue;
            }
            if (c == '\n') line_++;
            lit += c;
            pos_++;
        }
        flush();
    }

    // $name, ${name}, $name(index) — returns false when '$' is literal.
    bool read_dollar(Part& out) {
        size_t save = pos_;
        pos_++;  // '$'
        out.kind = Part::VarSub;
        if (pos_ < s_.size() && s_[pos_] == '{') {
            size_t close = s_.find('}', pos_ + 1);
            if (close == std::string_view::npos) fail("missing close-brace for variable name", line_);
            out.text = std::string(s_.substr(pos_ + 1, close - pos_ - 1));
            pos_ = close + 1;
            return true;
        }
        size_t name_start = pos_;
        while (pos_ < s_.size() && is_varname_char(s_[pos_])) pos_++;
        if (pos_ == name_start) {
            pos_ = save;
            return false;
        }
        out.text = std::string(s_.substr(name_start, pos_ - name_start));
        if (pos_ < s_.size() && s_[pos_] == '(') {
            pos_++;
            out.has_index = true;
            read_parts(out.index, [this] { return pos_ < s_.size() && s_[pos_] == ')'; }, false, line_);
            if (pos_ >= s_.size()) fail("missing close-paren for array index", line_);
            pos_++;  // ')'
        }
        return true;
    }

    // Raw text between matching brackets; understands nested brackets and
    // (at word start) braced/quoted groups so a ']' inside them doesn't end
    // the script.
    std::string read_bracket() {
        int start_line = line_;
        size_t open = pos_;
        pos_++;  // '['
        int depth = 1;
        bool word_start = true;
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == '\\' && pos_ + 1 < s_.size()) {
                pos_ += 2;
                word_start = false;
                continue;
            }
            if (c == '{' && word_start) {
                read_braced();
                word_start = false;
                continue;
            }
            if (c == '"' && word_start) {
                pos_++;
                while (pos_ < s_.size() && s_[pos_] != '"') {
                    if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) pos_++;
                    if (s_[pos_] == '\n') line_++;
                    pos_++;
                }
                if (pos_ >= s_.size()) fail("missing closing quote", start_line);
                pos_++;
                word_start = false;
                continue;
            }
            if (c == '[') depth++;
            if (c == ']' && --depth == 0) {
                std::string inner(s_.substr(open + 1, pos_ - open - 1));
                pos_++;
                return inner;
            }
            if (c == '\n') line_++;
            word_start = is_word_space(c) || is_cmd_end(c) || c == '[';
            pos_++;
        }
        fail("missing close-bracket", start_line);
    }

    // Balanced braces, backslash pairs skipped; returns inner text.
    std::string read_braced() {
        int start_line = line_;
        size_t open = pos_;
        pos_++;  // '{'
        int depth = 1;
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == '\\' && pos_ + 1 < s_.size()) {
                if (s_[pos_ + 1] == '\n') line_++;
                pos_ += 2;
                continue;
            }
            if (c == '\n') line_++;
            if (c == '{') depth++;
            if (c == '}' && --depth == 0) {
                pos_++;
                return std::string(s_.substr(open + 1, pos_ - open - 2));
            }
            pos_++;
        }
        fail("missing close-brace", start_line);
    }

    std::string_view s_;
    size_t pos_ = 0;
    int line_ = 1;
};

struct VarRef {
    std::string name;
    std::optional<std::string> index;
};

VarRef split_varref(const std::string& full) {
    auto open = full.find('(');
    if (open != std::string::npos && full.ends_with(")"))
        return {full.substr(0, open), full.substr(open + 1, full.size() - open - 2)};
    return {full, std::nullopt};
}

} // namespace

// ---- interpreter core ---------------------------------------------------------

Interp::Interp() {
    frames_.emplace_back();
    output_ = [](std::string_view text) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
    };
    register_builtins();
}

void Interp::define(const std::string& name, CommandFn fn) {
    commands_[name] = std::move(fn);
}

bool Interp::has_command(const std::string& name) const {
    return commands_.contains(name);
}

const Interp::Variable* Interp::find_var(const std::string& name) const {
    const Frame& local = frames_.back();
    if (auto it = local.find(name); it != local.end()) return &it->second;
    if (frames_.size() > 1) {
        if (auto it = frames_[0].find(name); it != frames_[0].end()) return &it->second;
    }
    return nullptr;
}

Interp::Variable& Interp::write_var(const std::string& name) {
    return frames_.back()[name];
}

void Interp::set_var(const std::string& name, std::string value) {
    VarRef ref = split_varref(name);
    Variable& var = write_var(ref.name);
    if (ref.index) {
        if (!var.is_array && !var.scalar.empty())
            throw ScriptError("can't set \"" + name + "\": variable isn't array");
        var.is_array = true;
        var.array[*ref.index] = std::move(value);
    } else {
        if (var.is_array)
            throw ScriptError("can't set \"" + name + "\": variable is array");
        var.scalar = std::move(value);
    }
}

std::string Interp::get_var(const std::string& name) const {
    VarRef ref = split_varref(name);
    const Variable* var = find_var(ref.name);
    if (!var) throw ScriptError("can't read \"" + name + "\": no such variable");
    if (ref.index) {
        if (!var->is_array)
            throw ScriptError("can't read \"" + name + "\": variable isn't array");
        auto it = var->array.find(*ref.index);
        if (it == var->array.end())
            throw ScriptError("can't read \"" + name + "\": no such element in array");
        return it->second;
    }
    if (var->is_array)
        throw ScriptError("can't read \"" + name + "\": variable is array");
    return var->scalar;
}

bool Interp::var_exists(const std::string& name) const {
    VarRef ref = split_varref(name);
    const Variable* var = find_var(ref.name);
    if (!var) return false;
    if (ref.index) return var->is_array && var->array.contains(*ref.index);
    return !var->is_array;
}

void Interp::unset_var(const std::string& name) {
    VarRef ref = split_varref(name);
    Frame& local = frames_.back();
    auto it = local.find(ref.name);
    if (it == local.end()) return;
    if (ref.index && it->second.is_array)
        it->second.array.erase(*ref.index);
    else
        local.erase(it);
}

void Interp::push_frame() { frames_.emplace_back(); }

void Interp::pop_frame() {
    if (frames_.size() > 1) frames_.pop_back();
}

size_t Interp::frame_depth() const { return frames_.size(); }

void Interp::set_output(std::function<void(std::string_view)> sink) {
    output_ = std::move(sink);
}

void Interp::write_output(std::string_view text) {
    if (output_) output_(text);
}

std::shared_ptr<const ScriptProgram> Interp::parsed(std::string_view script) {
    if (auto it = parse_cache_.find(script); it != parse_cache_.end()) return it->second;
    auto compiled = std::make_shared<ScriptProgram>(ScriptReader(script).run());
    if (parse_cache_.size() > 1024) parse_cache_.clear();
    parse_cache_.emplace(std::string(script), compiled);
    return compiled;
}

EvalResult Interp::eval_result(std::string_view script) {
    std::shared_ptr<const ScriptProgram> compiled;
    try {
        compiled = parsed(script);
    } catch (const ScriptError& e) {
        return EvalResult::error(e.what(), e.line());
    }
    if (eval_depth_ >= kMaxEvalDepth)
        return EvalResult::error("evaluation nested too deeply");
    eval_depth_++;
    EvalResult r = exec_script(*compiled);
    eval_depth_--;
    return r;
}

EvalResult Interp::exec_script(const ScriptProgram& script) {
    EvalResult last = EvalResult::ok();
    for (const ScriptCommand& cmd : script.commands) {
        EvalResult r = exec_command(cmd);
        if (r.flow != Flow::Ok) return r;
        last = std::move(r);
    }
    return last;
}

namespace {

// Arguments a command re-evaluates itself (loop conditions) are not
// substituted up front: doing both would run their side effects twice.
uint32_t lazy_arg_mask(const std::string& command) {
    if (command == "while") return 1u << 1;  // while COND body
    if (command == "for") return 1u << 2;    // for start COND next body
    return 0;
}

} // namespace

EvalResult Interp::exec_command(const ScriptCommand& cmd) {
    cancel_.checkpoint();
    // Nested evaluation during word substitution must not disturb the pipe
    // chain this command belongs to.
    bool was_engaged = pipe_engaged_;
    std::string was_value = pipe_value_;
    Invocation inv;
    inv.line = cmd.line;
    uint32_t lazy = 0;
    for (size_t i = 0; i < cmd.words.size(); i++) {
        const ScriptWord& w = cmd.words[i];
        std::string value;
        if (i > 0 && i < 32 && (lazy >> i) & 1u) {
            // left for the command to evaluate from raw[i]
        } else {
            EvalResult r = substitute_word(w, value);
            if (r.flow != Flow::Ok) {
                if (r.line == 0) r.line = cmd.line;
                return r;
            }
        }
        if (i == 0) lazy = lazy_arg_mask(value);
        inv.words.push_back(std::move(value));
        inv.raw.push_back(w.src);
    }
    if (inv.words.empty()) return EvalResult::ok();
    pipe_engaged_ = was_engaged;
    pipe_value_ = std::move(was_value);
    EvalResult r = dispatch(std::move(inv));
    if (r.is_error() && r.line == 0) r.line = cmd.line;
    return r;
}

EvalResult Interp::dispatch(Invocation inv) {
    const std::string& name = inv.words[0];
    if (name == "|") {
        Invocation seg;
        seg.line = inv.line;
        seg.words.assign(inv.words.begin() + 1, inv.words.end());
        seg.raw.assign(inv.raw.begin() + 1, inv.raw.end());
        if (seg.words.empty()) return EvalResult::error("empty pipe segment");
        if (pipe_engaged_) {
            seg.words.push_back(pipe_value_);
            seg.raw.push_back(pipe_value_);
        }
        pipe_engaged_ = false;
        EvalResult r = dispatch(std::move(seg));
        if (r.flow == Flow::Ok) {
            pipe_engaged_ = true;
            pipe_value_ = r.value;
        }
        return r;
    }
    pipe_engaged_ = false;

    auto it = commands_.find(name);
    if (it == commands_.end())
        return EvalResult::error("unknown command \"" + name + "\"");
    try {
        return it->second(*this, inv);
    } catch (const CancelledError&) {
        throw;  // cancellation is not a script-level error
    } catch (const ScriptError& e) {
        return EvalResult::error(e.what(), e.line());
    } catch (const std::exception& e) {
        return EvalResult::error(e.what());
    }
}

namespace {

// Array indices substitute like words; they may nest ($a($b($c))).
EvalResult eval_parts(Interp& in, const std::vector<Part>& parts, std::string& text) {
    for (const Part& p : parts) {
        switch (p.kind) {
        case Part::Literal:
            text += p.text;
            break;
        case Part::VarSub: {
            std::string name = p.text;
            if (p.has_index) {
                std::string idx;
                EvalResult r = eval_parts(in, p.index, idx);
                if (r.flow != Flow::Ok) return r;
                name += "(" + idx + ")";
            }
            try {
                text += in.get_var(name);
            } catch (const ScriptError& e) {
                return EvalResult::error(e.what());
            }
            break;
        }
        case Part::CmdSub: {
            EvalResult r = in.eval_result(p.text);
            if (r.flow != Flow::Ok) return r;
            text += r.value;
            break;
        }
        }
    }
    return EvalResult::ok();
}

} // namespace

EvalResult Interp::substitute_word(const ScriptWord& word, std::string& out) {
    if (word.kind == ScriptWord::Braced) {
        out = word.parts.empty() ? "" : word.parts[0].text;
        return EvalResult::ok();
    }
    return eval_parts(*this, word.parts, out);
}

std::string Interp::eval(std::string_view script) {
    if (eval_depth_ == 0) pipe_engaged_ = false;  // each top-level script starts a fresh chain
    EvalResult r = eval_result(script);
    switch (r.flow) {
    case Flow::Ok:
    case Flow::Return:
        return r.value;
    case Flow::Error:
        throw ScriptError(r.value, r.line);
    case Flow::Break:
        throw ScriptError("invoked \"break\" outside of a loop");
    case Flow::Continue:
        throw ScriptError("invoked \"continue\" outside of a loop");
    }
    return r.value;
}

std::string Interp::pipe_eval(std::string_view script) {
    auto compiled = parsed(script);
    for (const ScriptCommand& cmd : compiled->commands) {
        if (cmd.words.empty() || cmd.words[0].src != "|")
            throw ScriptError("pipe chain: every segment must begin with \"|\"");
    }
    pipe_engaged_ = false;
    return eval(script);
}

std::unique_ptr<Interp> Interp::spawn_child() const {
    auto child = std::make_unique<Interp>();
    child->commands_ = commands_;   // procs and natives alike
    child->frames_[0] = frames_[0]; // snapshot of globals
    child->output_ = output_;
    return child;
}

// ---- expr ----------------------------------------------------------------------

// Expression values stay textual; arithmetic reparses on demand the way Tcl
// treats everything as a string.
struct ExprParser {
    Interp& interp;
    std::string_view s;
    size_t p = 0;

    struct Val {
        std::string text;
    };

    [[noreturn]] void fail(const std::string& msg) {
        throw ScriptError(msg + " in expression \"" + std::string(s) + "\"");
    }

    void skip_ws() {
        while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) p++;
    }

    bool eat(std::string_view op) {
        skip_ws();
        if (s.compare(p, op.size(), op) == 0) {
            p += op.size();
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return p < s.size() ? s[p] : '\0';
    }

    long long as_int(const Val& v) {
        long long out;
        if (!try_int(v.text, out)) fail("expected integer but got \"" + v.text + "\"");
        return out;
    }

    bool truthy(const Val& v) {
        long long out;
        if (!try_int(v.text, out)) fail("expected boolean value but got \"" + v.text + "\"");
        return out != 0;
    }

    static Val from_int(long long v) { return {std::to_string(v)}; }
    static Val from_bool(bool b) { return {b ? "1" : "0"}; }

    Val parse(bool live = true) {
        Val v = parse_or(live);
        skip_ws();
        if (p != s.size()) fail("trailing characters");
        return v;
    }

    Val parse_or(bool live) {
        Val lhs = parse_and(live);
        while (true) {
            skip_ws();
            if (!eat("||")) return lhs;
            bool lhs_true = live && truthy(lhs);
            Val rhs = parse_and(live && !lhs_true);
            lhs = live ? from_bool(lhs_true || truthy_or_false(rhs, live && !lhs_true)) : rhs;
        }
    }

    // truthiness of a value computed under `computed`; dead values are false
    bool truthy_or_false(const Val& v, bool computed) {
        return computed ? truthy(v) : false;
    }

    Val parse_and(bool live) {
        Val lhs = parse_equality(live);
        while (true) {
            skip_ws();
            if (!eat("&&")) return lhs;
            bool lhs_true = live && truthy(lhs);
            Val rhs = parse_equality(live && lhs_true);
            lhs = live ? from_bool(lhs_true && truthy_or_false(rhs, live && lhs_true)) : rhs;
        }
    }

    Val parse_equality(bool live) {
        Val lhs = parse_relational(live);
        while (true) {
            skip_ws();
            bool eq;
            if (eat("==")) {
                eq = true;
            } else if (eat("!=")) {
                eq = false;
            } else {
                return lhs;
            }
            Val rhs = parse_relational(live);
            if (!live) continue;
            long long a, b;
            bool equal;
            if (try_int(lhs.text, a) && try_int(rhs.text, b))
                equal = a == b;
            else
                equal = lhs.text == rhs.text;
            lhs = from_bool(eq == equal);
        }
    }

    Val parse_relational(bool live) {
        Val lhs = parse_additive(live);
        while (true) {
            skip_ws();
            int op;  // 0:'<' 1:'<=' 2:'>' 3:'>='
            if (eat("<=")) op = 1;
            else if (eat(">=")) op = 3;
            else if (peek() == '<') { p++; op = 0; }
            else if (peek() == '>') { p++; op = 2; }
            else return lhs;
            Val rhs = parse_additive(live);
            if (!live) continue;
            long long a, b;
            int cmp;
            if (try_int(lhs.text, a) && try_int(rhs.text, b))
                cmp = a < b ? -1 : (a == b ? 0 : 1);
            else
                cmp = lhs.text.compare(rhs.text) < 0 ? -1 : (lhs.text == rhs.text ? 0 : 1);
            bool r = op == 0 ? cmp < 0 : op == 1 ? cmp <= 0 : op == 2 ? cmp > 0 : cmp >= 0;
            lhs = from_bool(r);
        }
    }

    Val parse_additive(bool live) {
        Val lhs = parse_term(live);
        while (true) {
            skip_ws();
            char c = peek();
            if (c != '+' && c != '-') return lhs;
            p++;
            Val rhs = parse_term(live);
            if (!live) continue;
            long long a = as_int(lhs), b = as_int(rhs), r;
            bool overflow = c == '+' ? __builtin_add_overflow(a, b, &r)
                                     : __builtin_sub_overflow(a, b, &r);
            if (overflow) fail("integer overflow");
            lhs = from_int(r);
        }
    }

    Val parse_term(bool live) {
        Val lhs = parse_unary(live);
        while (true) {
            skip_ws();
            char c = peek();
            if (c != '*' && c != '/' && c != '%') return lhs;
            p++;
            Val rhs = parse_unary(live);
            if (!live) continue;
            long long a = as_int(lhs), b = as_int(rhs), r;
            if (c == '*') {
                if (__builtin_mul_overflow(a, b, &r)) fail("integer overflow");
            } else {
                if (b == 0) fail("divide by zero");
                if (a == LLONG_MIN && b == -1) fail("integer overflow");
                r = c == '/' ? a / b : a % b;
            }
            lhs = from_int(r);
        }
    }

    Val parse_unary(bool live) {
        skip_ws();
        if (eat("!")) {
            Val v = parse_unary(live);
            return live ? from_bool(!truthy(v)) : v;
        }
        if (peek() == '-') {
            p++;
            Val v = parse_unary(live);
            if (!live) return v;
            long long a = as_int(v);
            if (a == LLONG_MIN) fail("integer overflow");
            return from_int(-a);
        }
        if (peek() == '+') {
            p++;
            Val v = parse_unary(live);
            if (live) as_int(v);
            return v;
        }
        return parse_primary(live);
    }

    Val parse_primary(bool live) {
        skip_ws();
        if (p >= s.size()) fail("unexpected end");
        char c = s[p];
        if (c == '(') {
            p++;
            Val v = parse_or(live);
            skip_ws();
            if (p >= s.size() || s[p] != ')') fail("missing )");
            p++;
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = p;
            while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) p++;
            return {std::string(s.substr(start, p - start))};
        }
        if (c == '$') return parse_variable(live);
        if (c == '[') {
            std::string script = scan_bracket();
            if (!live) return {""};
            EvalResult r = interp.eval_result(script);
            if (r.flow == Flow::Error) throw ScriptError(r.value, r.line);
            if (r.flow != Flow::Ok) throw ScriptError("unexpected flow control in expression");
            return {r.value};
        }
        if (c == '"') return parse_quoted(live);
        if (c == '{') return parse_braced();
        fail(std::string("unexpected character '") + c + "'");
    }

    Val parse_variable(bool live) {
        p++;  // '$'
        size_t start = p;
        while (p < s.size() && is_varname_char(s[p])) p++;
        if (p == start) fail("lone $");
        std::string name(s.substr(start, p - start));
        if (p < s.size() && s[p] == '(') {
            p++;
            std::string idx;
            while (p < s.size() && s[p] != ')') {
                if (s[p] == '$') {
                    Val nested = parse_variable(live);
                    idx += nested.text;
                } else if (s[p] == '[') {
                    std::string script = scan_bracket();
                    if (live) {
                        EvalResult r = interp.eval_result(script);
                        if (r.flow == Flow::Error) throw ScriptError(r.value, r.line);
                        idx += r.value;
                    }
                } else {
                    idx += s[p];
                    p++;
                }
            }
            if (p >= s.size()) fail("missing close-paren");
            p++;
            name += "(" + idx + ")";
        }
        if (!live) return {""};
        return {interp.get_var(name)};
    }

    Val parse_quoted(bool live) {
        p++;  // '"'
        std::string out;
        while (p < s.size() && s[p] != '"') {
            char c = s[p];
            if (c == '\\' && p + 1 < s.size()) {
                out += backslash_subst(s[p + 1]);
                p += 2;
            } else if (c == '$') {
                Val v = parse_variable(live);
                out += v.text;
            } else if (c == '[') {
                std::string script = scan_bracket();
                if (live) {
                    EvalResult r = interp.eval_result(script);
                    if (r.flow == Flow::Error) throw ScriptError(r.value, r.line);
                    out += r.value;
                }
            } else {
                out += c;
                p++;
            }
        }
        if (p >= s.size()) fail("missing closing quote");
        p++;
        return {std::move(out)};
    }

    Val parse_braced() {
        size_t open = p;
        int depth = 0;
        while (p < s.size()) {
            if (s[p] == '\\' && p + 1 < s.size()) {
                p += 2;
                continue;
            }
            if (s[p] == '{') depth++;
            if (s[p] == '}' && --depth == 0) {
                p++;
                return {std::string(s.substr(open + 1, p - open - 2))};
            }
            p++;
        }
        fail("missing close-brace");
    }

    std::string scan_bracket() {
        size_t open = p;
        int depth = 0;
        while (p < s.size()) {
            if (s[p] == '\\' && p + 1 < s.size()) {
                p += 2;
                continue;
            }
            if (s[p] == '{') {
                // skip a braced group wholesale
                int bd = 0;
                while (p < s.size()) {
                    if (s[p] == '\\' && p + 1 < s.size()) { p += 2; continue; }
                    if (s[p] == '{') bd++;
                    if (s[p] == '}' && --bd == 0) { p++; break; }
                    p++;
                }
                continue;
            }
            if (s[p] == '[') depth++;
            if (s[p] == ']' && --depth == 0) {
                p++;
                return std::string(s.substr(open + 1, p - open - 2));
            }
            p++;
        }
        fail("missing close-bracket");
    }
};

EvalResult Interp::eval_expr(std::string_view text) {
    try {
        ExprParser parser{*this, text};
        return EvalResult::ok(parser.parse().text);
    } catch (const CancelledError&) {
        throw;
    } catch (const ScriptError& e) {
        return EvalResult::error(e.what(), e.line());
    } catch (const std::exception& e) {
        return EvalResult::error(e.what());
    }
}

EvalResult Interp::eval_condition(std::string_view text, bool& out) {
    EvalResult r = eval_expr(text);
    if (r.flow != Flow::Ok) return r;
    long long v;
    if (!try_int(r.value, v))
        return EvalResult::error("expected boolean value but got \"" + r.value + "\"");
    out = v != 0;
    return EvalResult::ok();
}

// ---- builtins -------------------------------------------------------------------

namespace {

EvalResult arity_error(const std::string& usage) {
    return EvalResult::error("wrong # args: should be \"" + usage + "\"");
}

struct ProcDef {
    struct Param {
        std::string name;
        std::optional<std::string> default_value;
    };
    std::string name;
    std::vector<Param> params;
    std::string body;
};

EvalResult call_proc(Interp& in, const std::shared_ptr<const ProcDef>& def, const Invocation& inv) {
    size_t given = inv.size() - 1;
    size_t required = 0;
    for (const auto& p : def->params)
        if (!p.default_value) required++;
    if (given < required || given > def->params.size())
        return arity_error(def->name + " <" + std::to_string(def->params.size()) + " args>");

    in.push_frame();
    struct FrameGuard {
        Interp& in;
        ~FrameGuard() { in.pop_frame(); }
    } guard{in};

    for (size_t i = 0; i < def->params.size(); i++) {
        if (i < given)
            in.set_var(def->params[i].name, inv[i + 1]);
        else
            in.set_var(def->params[i].name, *def->params[i].default_value);
    }
    EvalResult r = in.eval_result(def->body);
    switch (r.flow) {
    case Flow::Return:
    case Flow::Ok:
        return EvalResult::ok(std::move(r.value));
    case Flow::Break:
        return EvalResult::error("invoked \"break\" outside of a loop");
    case Flow::Continue:
        return EvalResult::error("invoked \"continue\" outside of a loop");
    case Flow::Error:
        return r;
    }
    return r;
}

} // namespace

void Interp::register_builtins() {
    define("set", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() == 2) return EvalResult::ok(in.get_var(inv[1]));
        if (inv.size() != 3) return arity_error("set varName ?newValue?");
        in.set_var(inv[1], inv[2]);
        return EvalResult::ok(inv[2]);
    });

    define("incr", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2 && inv.size() != 3) return arity_error("incr varName ?increment?");
        long long amount = 1;
        if (inv.size() == 3 && !try_int(inv[2], amount))
            return EvalResult::error("expected integer but got \"" + inv[2] + "\"");
        long long current = 0;
        if (in.var_exists(inv[1]) && !try_int(in.get_var(inv[1]), current))
            return EvalResult::error("expected integer but got \"" + in.get_var(inv[1]) + "\"");
        long long next;
        if (__builtin_add_overflow(current, amount, &next))
            return EvalResult::error("integer overflow");
        std::string text = std::to_string(next);
        in.set_var(inv[1], text);
        return EvalResult::ok(std::move(text));
    });

    define("puts", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2) return arity_error("puts string");
        in.write_output(inv[1]);
        in.write_output("\n");
        return EvalResult::ok();
    });

    define("list", [](Interp&, const Invocation& inv) -> EvalResult {
        std::vector<std::string> elems(inv.words.begin() + 1, inv.words.end());
        return EvalResult::ok(list_format(elems));
    });

    define("lappend", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() < 2) return arity_error("lappend varName ?value ...?");
        std::string current = in.var_exists(inv[1]) ? in.get_var(inv[1]) : "";
        for (size_t i = 2; i < inv.size(); i++) {
            if (!current.empty()) current += ' ';
            current += list_element(inv[i]);
        }
        in.set_var(inv[1], current);
        return EvalResult::ok(std::move(current));
    });

    define("error", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2) return arity_error("error message");
        return EvalResult::error(inv[1]);
    });

    define("return", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() > 2) return arity_error("return ?value?");
        return {Flow::Return, inv.size() == 2 ? inv[1] : "", 0};
    });

    define("break", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 1) return arity_error("break");
        return {Flow::Break, "", 0};
    });

    define("continue", [](Interp&, const Invocation& inv) -> EvalResult {
        if (inv.size() != 1) return arity_error("continue");
        return {Flow::Continue, "", 0};
    });

    define("catch", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2 && inv.size() != 3) return arity_error("catch script ?varName?");
        EvalResult r = in.eval_result(inv[1]);
        int code = 0;
        switch (r.flow) {
        case Flow::Ok: code = 0; break;
        case Flow::Error: code = 1; break;
        case Flow::Return: code = 2; break;
        case Flow::Break: code = 3; break;
        case Flow::Continue: code = 4; break;
        }
        if (inv.size() == 3) in.set_var(inv[2], r.value);
        return EvalResult::ok(std::to_string(code));
    });

    define("expr", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() < 2) return arity_error("expr arg ?arg ...?");
        std::string text;
        for (size_t i = 1; i < inv.size(); i++) {
            if (i > 1) text += ' ';
            text += inv[i];
        }
        return in.eval_expr(text);
    });

    define("if", [](Interp& in, const Invocation& inv) -> EvalResult {
        // if cond body ?elseif cond body ...? ?else body?
        // conditions were substituted once with the other words; a braced
        // condition arrives as literal expr text, a bracketed one as its
        // result
        size_t i = 1;
        while (true) {
            if (i + 1 >= inv.size()) return arity_error("if cond body ?else body?");
            bool cond;
            EvalResult c = in.eval_condition(inv[i], cond);
            if (c.flow != Flow::Ok) return c;
            if (cond) return in.eval_result(inv[i + 1]);
            i += 2;
            if (i >= inv.size()) return EvalResult::ok();
            if (inv[i] == "elseif") {
                i++;
                continue;
            }
            if (inv[i] == "else") {
                if (i + 1 >= inv.size() || i + 2 != inv.size())
                    return arity_error("if cond body else body");
                return in.eval_result(inv[i + 1]);
            }
            // bare "else" body form: if cond body body
            if (i + 1 == inv.size()) return in.eval_result(inv[i]);
            return arity_error("if cond body ?elseif cond body? ?else body?");
        }
    });

    define("while", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() != 3) return arity_error("while test command");
        while (true) {
            bool cond;
            EvalResult c = in.eval_condition(inv.raw[1], cond);
            if (c.flow != Flow::Ok) return c;
            if (!cond) break;
            EvalResult r = in.eval_result(inv[2]);
            if (r.flow == Flow::Break) break;
            if (r.flow == Flow::Continue || r.flow == Flow::Ok) continue;
            return r;
        }
        return EvalResult::ok();
    });

    define("for", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() != 5) return arity_error("for start test next command");
        EvalResult r = in.eval_result(inv[1]);
        if (r.flow != Flow::Ok) return r;
        while (true) {
            bool cond;
            EvalResult c = in.eval_condition(inv.raw[2], cond);
            if (c.flow != Flow::Ok) return c;
            if (!cond) break;
            EvalResult body = in.eval_result(inv[4]);
            if (body.flow == Flow::Break) break;
            if (body.flow != Flow::Ok && body.flow != Flow::Continue) return body;
            EvalResult next = in.eval_result(inv[3]);
            if (next.flow != Flow::Ok) return next;
        }
        return EvalResult::ok();
    });

    define("foreach", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() != 4) return arity_error("foreach varList list command");
        std::vector<std::string> vars = list_split(inv[1]);
        if (vars.empty()) return EvalResult::error("foreach: empty variable list");
        std::vector<std::string> items = list_split(inv[2]);
        for (size_t i = 0; i < items.size(); i += vars.size()) {
            for (size_t v = 0; v < vars.size(); v++)
                in.set_var(vars[v], i + v < items.size() ? items[i + v] : "");
            EvalResult r = in.eval_result(inv[3]);
            if (r.flow == Flow::Break) break;
            if (r.flow != Flow::Ok && r.flow != Flow::Continue) return r;
        }
        return EvalResult::ok();
    });

    define("switch", [](Interp& in, const Invocation& inv) -> EvalResult {
        // switch string {pattern body ...}  |  switch string pattern body ...
        size_t i = 1;
        if (i < inv.size() && inv[i] == "--") i++;
        if (i >= inv.size()) return arity_error("switch string pattern body ...");
        std::string subject = inv[i++];
        std::vector<std::string> clauses;
        if (inv.size() - i == 1) {
            clauses = list_split(inv[i]);
        } else {
            clauses.assign(inv.words.begin() + static_cast<ptrdiff_t>(i), inv.words.end());
        }
        if (clauses.empty() || clauses.size() % 2 != 0)
            return EvalResult::error("switch: pattern with no body");
        for (size_t c = 0; c < clauses.size(); c += 2) {
            if (clauses[c] == subject || clauses[c] == "default")
                return in.eval_result(clauses[c + 1]);
        }
        return EvalResult::ok();
    });

    define("proc", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() != 4) return arity_error("proc name args body");
        auto def = std::make_shared<ProcDef>();
        def->name = inv[1];
        def->body = inv[3];
        for (const std::string& spec : list_split(inv[2])) {
            std::vector<std::string> pieces = list_split(spec);
            if (pieces.size() == 1) {
                def->params.push_back({pieces[0], std::nullopt});
            } else if (pieces.size() == 2) {
                def->params.push_back({pieces[0], pieces[1]});
            } else {
                return EvalResult::error("proc \"" + def->name + "\": bad parameter \"" + spec + "\"");
            }
        }
        in.define(def->name, [def](Interp& interp, const Invocation& call) {
            return call_proc(interp, def, call);
        });
        return EvalResult::ok();
    });

    define("after", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() != 2) return arity_error("after ms");
        long long ms;
        if (!try_int(inv[1], ms) || ms < 0)
            return EvalResult::error("after: bad milliseconds \"" + inv[1] + "\"");
        in.cancel_token().sleep_for(std::chrono::milliseconds(ms));
        return EvalResult::ok();
    });

    define("scan", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() < 3) return arity_error("scan string format ?varName ...?");
        const std::string& str = inv[1];
        const std::string& fmt = inv[2];
        size_t si = 0, vi = 3;
        int assigned = 0;
        auto skip_ws = [&] {
            while (si < str.size() && std::isspace(static_cast<unsigned char>(str[si]))) si++;
        };
        for (size_t fi = 0; fi < fmt.size(); fi++) {
            char f = fmt[fi];
            if (std::isspace(static_cast<unsigned char>(f))) {
                skip_ws();
                continue;
            }
            if (f == '%' && fi + 1 < fmt.size()) {
                char conv = fmt[++fi];
                skip_ws();
                std::string field;
                if (conv == 's') {
                    while (si < str.size() && !std::isspace(static_cast<unsigned char>(str[si])))
                        field += str[si++];
                    if (field.empty()) break;
                } else if (conv == 'd') {
                    size_t start = si;
                    if (si < str.size() && (str[si] == '+' || str[si] == '-')) si++;
                    size_t digits_at = si;
                    while (si < str.size() && std::isdigit(static_cast<unsigned char>(str[si]))) si++;
                    if (si == digits_at) {
                        si = start;
                        break;
                    }
                    field = str.substr(start, si - start);
                } else {
                    return EvalResult::error(std::string("scan: unsupported conversion %") + conv);
                }
                if (vi < inv.size()) {
                    in.set_var(inv[vi++], field);
                    assigned++;
                }
                continue;
            }
            if (si < str.size() && str[si] == f) si++;
            else break;
        }
        return EvalResult::ok(std::to_string(assigned));
    });

    define("regexp", [](Interp& in, const Invocation& inv) -> EvalResult {
        size_t i = 1;
        bool nocase = false;
        while (i < inv.size() && inv[i].starts_with("-")) {
            if (inv[i] == "-nocase") nocase = true;
            else if (inv[i] == "--") { i++; break; }
            else return EvalResult::error("regexp: bad switch \"" + inv[i] + "\"");
            i++;
        }
        if (i >= inv.size() || inv.size() - i < 2)
            return arity_error("regexp ?-nocase? exp string ?matchVar ...?");
        const std::string& pattern = inv[i];
        const std::string& subject = inv[i + 1];
        auto flags = std::regex::ECMAScript;
        if (nocase) flags |= std::regex::icase;
        try {
            std::regex re(pattern, flags);
            std::smatch m;
            bool matched = std::regex_search(subject, m, re);
            for (size_t v = i + 2, g = 0; v < inv.size(); v++, g++) {
                std::string capture;
                if (matched && g < m.size()) capture = m[g].str();
                in.set_var(inv[v], capture);
            }
            return EvalResult::ok(matched ? "1" : "0");
        } catch (const std::regex_error& e) {
            return EvalResult::error(std::string("regexp: bad pattern: ") + e.what());
        }
    });

    define("info", [](Interp& in, const Invocation& inv) -> EvalResult {
        if (inv.size() >= 2 && inv[1] == "exists") {
            if (inv.size() != 3) return arity_error("info exists varName");
            return EvalResult::ok(in.var_exists(inv[2]) ? "1" : "0");
        }
        return EvalResult::error("info: unsupported subcommand");
    });
}

} // namespace webshell
