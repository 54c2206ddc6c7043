#include "webshell/fixture_server.h"

#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "webshell/error.h"
#include "webshell/url.h"

namespace webshell {

namespace {

std::string content_type_for(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html";
    if (ext == ".txt") return "text/plain";
    if (ext == ".css") return "text/css";
    if (ext == ".js") return "text/javascript";
    if (ext == ".json") return "application/json";
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    return "application/octet-stream";
}

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c);
    });
}

} // namespace

struct FixtureServer::Impl {
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> running{false};

    std::filesystem::path root;
    std::map<std::string, Override> overrides;

    mutable std::mutex log_mu;
    std::vector<LogEntry> log;

    void handle(const httplib::Request& req, httplib::Response& res) {
        if (req.path.starts_with("/__")) {
            handle_admin(req, res);
            return;
        }
        {
            std::lock_guard lock(log_mu);
            log.emplace_back(req.method, req.target.empty() ? req.path : req.target);
        }

        auto ov = overrides.find(req.path);
        if (ov != overrides.end()) {
            respond_override(ov->second, req, res);
            return;
        }
        if (req.path == "/slow") {
            int ms = 0;
            if (req.has_param("ms") && all_digits(req.get_param_value("ms")))
                ms = std::stoi(req.get_param_value("ms"));
            wait(ms);
            res.status = 200;
            res.set_content("slow response after " + std::to_string(ms) + " ms\n", "text/plain");
            return;
        }
        serve_file(req.path, res);
    }

    void respond_override(const Override& ov, const httplib::Request& req, httplib::Response& res) {
        if (ov.delay_ms > 0) wait(ov.delay_ms);
        res.status = ov.status;
        if (!ov.location.empty()) {
            res.set_header("Location", ov.location);
            res.set_content("redirect to " + ov.location + "\n", "text/plain");
            return;
        }
        if (ov.echo) {
            res.set_content(req.body, "text/plain");
            return;
        }
        if (!ov.body.empty()) {
            res.set_content(ov.body, "text/html");
            return;
        }
        // fall back to the file when present, else a deterministic stub
        if (!root.empty()) {
            std::filesystem::path file = resolve_path(req.path);
            std::ifstream f(file, std::ios::binary);
            if (f) {
                std::ostringstream body;
                body << f.rdbuf();
                res.set_content(body.str(), content_type_for(file));
                return;
            }
        }
        res.set_content("status " + std::to_string(ov.status) + "\n", "text/plain");
    }

    std::filesystem::path resolve_path(const std::string& url_path) const {
        // keep lookups inside the document root
        std::filesystem::path rel;
        for (const auto& segment : std::filesystem::path(url_path).relative_path()) {
            if (segment == "..") continue;
            rel /= segment;
        }
        std::filesystem::path full = root / rel;
        if (url_path.ends_with("/") || rel.empty()) full /= "index.html";
        return full;
    }

    void serve_file(const std::string& url_path, httplib::Response& res) {
        if (root.empty()) {
            res.status = 404;
            res.set_content("no document root\n", "text/plain");
            return;
        }
        std::filesystem::path full = resolve_path(url_path);
        std::ifstream f(full, std::ios::binary);
        if (!f) {
            res.status = 404;
            res.set_content("not found: " + url_path + "\n", "text/plain");
            return;
        }
        std::ostringstream body;
        body << f.rdbuf();
        res.status = 200;
        res.set_content(body.str(), content_type_for(full));
    }

    void handle_admin(const httplib::Request& req, httplib::Response& res) {
        if (req.path == "/__log") {
            std::ostringstream out;
            {
                std::lock_guard lock(log_mu);
                for (const auto& [method, target] : log) out << method << " " << target << "\n";
            }
            res.set_content(out.str(), "text/plain");
            return;
        }
        if (req.path == "/__reset") {
            std::lock_guard lock(log_mu);
            log.clear();
            res.set_content("ok\n", "text/plain");
            return;
        }
        res.status = 404;
        res.set_content("unknown admin endpoint\n", "text/plain");
    }

    // delay in slices so stop() is never held up by a pending slow response
    void wait(int ms) {
        auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
        while (running && std::chrono::steady_clock::now() < deadline)
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
};

FixtureServer::FixtureServer() : impl_(std::make_unique<Impl>()) {}

FixtureServer::~FixtureServer() {
    stop();
}

void FixtureServer::set_root(std::filesystem::path root) {
    impl_->root = std::move(root);
}

void FixtureServer::set_override(const std::string& path, Override ov) {
    impl_->overrides[path] = std::move(ov);
}

void FixtureServer::load_overrides(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw Error("cannot read override file \"" + file.string() + "\"");
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        line_no++;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream parts(line);
        std::string path, status, extra;
        if (!(parts >> path)) continue;
        if (!(parts >> status) || !all_digits(status))
            throw Error("override file line " + std::to_string(line_no) + ": expected PATH STATUS");
        Override ov;
        ov.status = std::stoi(status);
        if (parts >> extra) {
            if (extra == "ECHO")
                ov.echo = true;
            else if (all_digits(extra))
                ov.delay_ms = std::stoi(extra);
            else
                ov.location = extra;
        }
        set_override(path, std::move(ov));
    }
}

int FixtureServer::start(int port) {
    Impl& impl = *impl_;
    impl.server.Get(".*", [&impl](const httplib::Request& req, httplib::Response& res) {
        impl.handle(req, res);
    });
    impl.server.Post(".*", [&impl](const httplib::Request& req, httplib::Response& res) {
        impl.handle(req, res);
    });

    if (port == 0) {
        port_ = impl.server.bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw Error("cannot bind fixture server");
    } else {
        if (!impl.server.bind_to_port("127.0.0.1", port))
            throw Error("cannot bind fixture server to port " + std::to_string(port));
        port_ = port;
    }
    impl.running = true;
    impl.thread = std::thread([&impl] { impl.server.listen_after_bind(); });
    impl.server.wait_until_ready();
    return port_;
}

void FixtureServer::stop() {
    Impl& impl = *impl_;
    if (!impl.running.exchange(false)) return;
    impl.server.stop();
    if (impl.thread.joinable()) impl.thread.join();
}

std::string FixtureServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
}

std::vector<FixtureServer::LogEntry> FixtureServer::request_log() const {
    std::lock_guard lock(impl_->log_mu);
    return impl_->log;
}

void FixtureServer::clear_log() {
    std::lock_guard lock(impl_->log_mu);
    impl_->log.clear();
}

size_t FixtureServer::request_count(const std::string& path_with_query) const {
    std::lock_guard lock(impl_->log_mu);
    size_t n = 0;
    for (const auto& [method, target] : impl_->log)
        if (target == path_with_query) n++;
    return n;
}

} // namespace webshell
