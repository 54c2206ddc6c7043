#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace webshell {

/// Deterministic in-process HTTP server backing the tests and examples:
/// serves files under a document root, replays scripted responses (404s,
/// redirect chains and cycles, delayed responses, a form echo endpoint), and
/// logs every request in arrival order. Identical request sequences produce
/// identical response sequences.
///
/// Built-ins: GET /slow?ms=N responds after N milliseconds; paths starting
/// with /__ are admin endpoints (GET /__log dumps the request log, GET
/// /__reset clears it) and are never logged.
class FixtureServer {
public:
    struct Override {
        int status = 200;
        std::string location;  // for 3xx
        int delay_ms = 0;
        bool echo = false;     // respond with the request body
        std::string body;      // fixed body; empty -> file or default
    };

    FixtureServer();
    ~FixtureServer();
    FixtureServer(const FixtureServer&) = delete;
    FixtureServer& operator=(const FixtureServer&) = delete;

    void set_root(std::filesystem::path root);
    void set_override(const std::string& path, Override ov);

    /// Load the override table: `PATH STATUS [LOCATION|DELAY_MS|ECHO]`, one
    /// per line, '#' comments. A third field starting with '/' or a scheme is
    /// a redirect Location, ECHO echoes the request body, digits are a delay
    /// in milliseconds.
    void load_overrides(const std::filesystem::path& file);

    /// Bind and serve on a background thread. port 0 picks a free port.
    /// Returns the bound port.
    int start(int port = 0);
    void stop();

    int port() const { return port_; }
    std::string base_url() const;  // http://127.0.0.1:<port>

    using LogEntry = std::pair<std::string, std::string>;  // (method, path+query)
    std::vector<LogEntry> request_log() const;
    void clear_log();
    size_t request_count(const std::string& path_with_query) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

} // namespace webshell
