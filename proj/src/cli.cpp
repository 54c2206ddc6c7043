#include "webshell/cli.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "webshell/apps.h"
#include "webshell/error.h"
#include "webshell/fixture_server.h"
#include "webshell/interp.h"
#include "webshell/ws_commands.h"

namespace webshell {

namespace {

std::chrono::milliseconds default_fetch_timeout() {
    if (const char* env = std::getenv("WEBSHELL_TIMEOUT_MS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return std::chrono::milliseconds(v);
    }
    return std::chrono::milliseconds(10000);
}

int run_script_file(const std::string& path, const std::vector<std::string>& args) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "wsh: cannot read script \"" << path << "\"\n";
        return 1;
    }
    std::ostringstream source;
    source << f.rdbuf();

    Interp interp;
    register_ws_commands(interp);
    interp.set_var("argv", list_format(args));
    interp.set_var("argc", std::to_string(args.size()));
    interp.set_var("argv0", path);
    try {
        interp.eval(source.str());
    } catch (const ScriptError& e) {
        std::cerr << "wsh: " << e.what();
        if (e.line() > 0) std::cerr << " (while executing line " << e.line() << ")";
        std::cerr << "\n";
        return 1;
    }
    return 0;
}

int run_repl() {
    Interp interp;
    register_ws_commands(interp);
    interp.set_var("argv", "");
    interp.set_var("argc", "0");
    std::string line;
    while (true) {
        std::cout << "% " << std::flush;
        if (!std::getline(std::cin, line)) break;
        try {
            std::string result = interp.eval(line);
            if (!result.empty()) std::cout << result << "\n";
        } catch (const ScriptError& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    std::cout << "\n";
    return 0;
}

int run_wsh(const std::vector<std::string>& args) {
    if (args.empty()) return run_repl();
    if (args[0] == "--help" || args[0] == "-h") {
        std::cout << "usage: wsh [script [arg ...]]\n";
        return 0;
    }
    return run_script_file(args[0], {args.begin() + 1, args.end()});
}

int run_webgrep(const std::string& url, int depth, const std::string& pattern,
                bool parallel, bool raw_hrefs, long timeout_ms) {
    GrepOptions opts;
    opts.timeout = std::chrono::milliseconds(timeout_ms);
    opts.timeslot = std::min(opts.timeout, std::chrono::milliseconds(100));
    opts.parallel = parallel;
    opts.raw_hrefs = raw_hrefs;
    GrepResult result = webgrep(url, depth, pattern, opts);
    for (const std::string& match : result.matches) std::cout << match << "\n";
    std::cout << "# " << result.matches.size() << " matches, " << result.visited
              << " pages visited, " << result.failed.size() << " failures\n";
    bool start_failed = std::find(result.failed.begin(), result.failed.end(), url) !=
                        result.failed.end();
    return start_failed ? 1 : 0;
}

int run_linkcheck(const std::string& url, const std::string& out_file) {
    ValidationReport report = annotate_links(url);
    for (const LinkEntry& link : report.links) {
        std::cout << to_string(link.verdict) << " " << (link.resolved ? *link.resolved : "-")
                  << " " << link.href << "\n";
    }
    if (!out_file.empty()) {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw Error("cannot write \"" + out_file + "\"");
        out << report.annotated_html;
    }
    return 0;
}

int run_webcopy(const std::string& url, int depth, const std::string& out_dir, long timeout_ms) {
    CopyOptions opts;
    opts.timeout = std::chrono::milliseconds(timeout_ms);
    opts.timeslot = std::min(opts.timeout, std::chrono::milliseconds(100));
    size_t written = webcopy(url, depth, out_dir, opts);
    std::cout << written << " files written\n";
    return depth > 0 && written == 0 ? 1 : 0;
}

int run_serve(const std::string& root, int port, const std::string& overrides) {
    if (!std::filesystem::is_directory(root)) {
        std::cerr << "serve-fixtures: root \"" << root << "\" is not a directory\n";
        return 1;
    }
    FixtureServer server;
    server.set_root(root);
    if (!overrides.empty()) server.load_overrides(overrides);
    int bound = server.start(port);
    std::cout << "serving " << root << " at http://127.0.0.1:" << bound << "\n" << std::flush;
    while (true) std::this_thread::sleep_for(std::chrono::seconds(1));
}

} // namespace

int cli_main(const std::vector<std::string>& args) {
    if (args.empty()) {
        std::cerr << "usage: webshell <wsh|webgrep|linkcheck|webcopy|serve-fixtures> ...\n";
        return 2;
    }
    // wsh takes free-form script arguments; keep them away from flag parsing
    if (args[0] == "wsh") return run_wsh({args.begin() + 1, args.end()});

    CLI::App app{"webshell: tag-tree tooling for the web"};
    app.require_subcommand(1);

    long default_timeout = default_fetch_timeout().count();

    std::string url, pattern, out_file, out_dir, root, overrides;
    int depth = 0, port = 0;
    long timeout_ms = default_timeout;
    bool parallel = false, raw_hrefs = false;

    CLI::App* grep = app.add_subcommand("webgrep", "search pages within N links of a URL");
    grep->add_option("--url", url, "start URL")->required();
    grep->add_option("--depth", depth, "crawl depth (exclusive bound)")
        ->required()
        ->check(CLI::NonNegativeNumber);
    grep->add_option("--pattern", pattern, "case-insensitive regular expression")->required();
    grep->add_flag("--parallel", parallel, "fetch each level with parallel tasks");
    grep->add_flag("--raw-hrefs", raw_hrefs, "crawl href values verbatim (no resolution)");
    grep->add_option("--timeout", timeout_ms, "per-page fetch timeout in ms")
        ->check(CLI::PositiveNumber);

    CLI::App* check = app.add_subcommand("linkcheck", "validate and strike out broken links");
    check->add_option("--url", url, "page URL")->required();
    check->add_option("--out", out_file, "write annotated HTML to this file");

    CLI::App* copy = app.add_subcommand("webcopy", "mirror a site subtree locally");
    copy->add_option("--url", url, "start URL")->required();
    copy->add_option("--depth", depth, "crawl depth (exclusive bound)")
        ->required()
        ->check(CLI::NonNegativeNumber);
    copy->add_option("--out", out_dir, "output directory")->required();
    copy->add_option("--timeout", timeout_ms, "per-page fetch timeout in ms")
        ->check(CLI::PositiveNumber);

    CLI::App* serve = app.add_subcommand("serve-fixtures", "run the deterministic fixture server");
    serve->add_option("--root", root, "document root")->required();
    serve->add_option("--port", port, "listen port (0 = any)")->check(CLI::NonNegativeNumber);
    serve->add_option("--overrides", overrides, "scripted response table");

    std::vector<const char*> argv{"webshell"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 2;
    }

    try {
        if (grep->parsed()) return run_webgrep(url, depth, pattern, parallel, raw_hrefs, timeout_ms);
        if (check->parsed()) return run_linkcheck(url, out_file);
        if (copy->parsed()) return run_webcopy(url, depth, out_dir, timeout_ms);
        if (serve->parsed()) return run_serve(root, port, overrides);
    } catch (const Error& e) {
        std::cerr << args[0] << ": " << e.what() << "\n";
        return 1;
    }
    std::cerr << "usage: webshell <wsh|webgrep|linkcheck|webcopy|serve-fixtures> ...\n";
    return 2;
}

} // namespace webshell
