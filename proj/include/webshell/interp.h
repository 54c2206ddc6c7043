#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webshell/error.h"
#include "webshell/tasks.h"

namespace webshell {

// ---- Tcl-style list values -------------------------------------------------

/// Split a list value into elements (whitespace separation, brace/quote
/// grouping, backslash escapes). Throws ScriptError on unbalanced input.
std::vector<std::string> list_split(std::string_view text);

/// Quote one element so list_split recovers it exactly.
std::string list_element(std::string_view elem);

/// Format elements into a list value; list_split(list_format(v)) == v.
std::string list_format(const std::vector<std::string>& elems);

// ---- evaluation results ------------------------------------------------------

enum class Flow { Ok, Error, Return, Break, Continue };

struct EvalResult {
    Flow flow = Flow::Ok;
    std::string value;  // command result, or the error message for Flow::Error
    int line = 0;       // best-known source line for errors

    static EvalResult ok(std::string v = "") { return {Flow::Ok, std::move(v), 0}; }
    static EvalResult error(std::string msg, int line = 0) {
        return {Flow::Error, std::move(msg), line};
    }
    bool is_error() const { return flow == Flow::Error; }
};

/// One substituted command invocation. words[0] is the command name. raw
/// holds each word's unsubstituted source (for a braced word, the inner
/// text), which is what re-evaluating builtins like while use for their
/// condition.
struct Invocation {
    std::vector<std::string> words;
    std::vector<std::string> raw;
    int line = 0;

    size_t size() const { return words.size(); }
    const std::string& operator[](size_t i) const { return words[i]; }
};

class Interp;
using CommandFn = std::function<EvalResult(Interp&, const Invocation&)>;

// parsed-script representation, defined in interp.cpp
struct ScriptWord;
struct ScriptCommand;
struct ScriptProgram;

// ---- the interpreter ---------------------------------------------------------

/// A small Tcl-subset interpreter: commands separated by newline/';', words
/// with {...} literal grouping, "..." grouping with substitution, [...]
/// command substitution, $name and $name(key) variable substitution, '\'
/// escapes, '#' comments at command start. Builtins: set puts list lappend
/// foreach for while if switch incr proc return catch error break continue
/// after expr scan regexp info. Values are strings throughout.
class Interp {
public:
    Interp();
    Interp(const Interp&) = delete;
    Interp& operator=(const Interp&) = delete;

    /// Evaluate a script, returning the last command's result. Throws
    /// ScriptError on parse errors and uncaught command errors.
    std::string eval(std::string_view script);

    /// The pipe form: a ';'-separated chain of segments each beginning with
    /// '|'; segment k's result is appended as one final word to segment k+1.
    std::string pipe_eval(std::string_view script);

    /// Internal-flow evaluation used by command implementations.
    EvalResult eval_result(std::string_view script);

    /// Evaluate expr syntax: integer arithmetic/comparison, string (in)equality,
    /// '!', parentheses, with $var, [cmd], quoted and braced operands.
    EvalResult eval_expr(std::string_view text);
    /// expr + truthiness; used for while/if/for conditions.
    EvalResult eval_condition(std::string_view text, bool& out);

    // commands
    void define(const std::string& name, CommandFn fn);
    bool has_command(const std::string& name) const;

    // variables ("arr(key)" addresses an array element)
    void set_var(const std::string& name, std::string value);
    std::string get_var(const std::string& name) const;  // throws if unset
    bool var_exists(const std::string& name) const;
    void unset_var(const std::string& name);

    // proc call frames (exposed for the proc implementation)
    void push_frame();
    void pop_frame();
    size_t frame_depth() const;

    // output sink for puts (default: stdout)
    void set_output(std::function<void(std::string_view)> sink);
    void write_output(std::string_view text);

    // cooperative cancellation: checked between commands and inside `after`
    void set_cancel_token(CancelToken token) { cancel_ = std::move(token); }
    const CancelToken& cancel_token() const { return cancel_; }

    /// Fresh interpreter for a task: copies the command table (procs
    /// included), a snapshot of global variables, and the output sink.
    /// Shares no mutable state with this one.
    std::unique_ptr<Interp> spawn_child() const;

private:
    struct Variable {
        bool is_array = false;
        std::string scalar;
        std::map<std::string, std::string> array;
    };
    using Frame = std::map<std::string, Variable>;

    friend struct ExprParser;

    std::shared_ptr<const ScriptProgram> parsed(std::string_view script);

    EvalResult exec_script(const ScriptProgram& script);
    EvalResult exec_command(const ScriptCommand& cmd);
    EvalResult dispatch(Invocation inv);
    EvalResult substitute_word(const ScriptWord& word, std::string& out);

    const Variable* find_var(const std::string& name) const;
    Variable& write_var(const std::string& name);

    void register_builtins();

    std::map<std::string, CommandFn> commands_;
    std::vector<Frame> frames_;  // frames_[0] = globals
    std::map<std::string, std::shared_ptr<const ScriptProgram>, std::less<>> parse_cache_;
    std::function<void(std::string_view)> output_;
    CancelToken cancel_;
    int eval_depth_ = 0;
    bool pipe_engaged_ = false;
    std::string pipe_value_;
};

} // namespace webshell
