#pragma once

// Test-only oracles, deliberately independent of the library's iterative
// implementations: recursive preorder, level-list breadth-first order, and a
// recursive structural-equality check.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "webshell/iterate.h"
#include "webshell/tree.h"

namespace testsupport {

inline void preorder_oracle(const webshell::TagTree& tree, webshell::NodeId node,
                            webshell::NodeFilter filter, std::vector<webshell::NodeId>& out) {
    if (webshell::filter_matches(filter, tree.content(node))) out.push_back(node);
    for (webshell::NodeId child : tree.children(node))
        preorder_oracle(tree, child, filter, out);
}

inline std::vector<webshell::NodeId> preorder_oracle(const webshell::TagTree& tree,
                                                     webshell::NodeId node,
                                                     webshell::NodeFilter filter) {
    std::vector<webshell::NodeId> out;
    preorder_oracle(tree, node, filter, out);
    return out;
}

// Level-by-level, built from explicit level lists rather than a queue.
inline std::vector<webshell::NodeId> level_order_oracle(const webshell::TagTree& tree,
                                                        webshell::NodeId node,
                                                        webshell::NodeFilter filter) {
    std::vector<webshell::NodeId> out;
    std::vector<webshell::NodeId> level{node};
    while (!level.empty()) {
        std::vector<webshell::NodeId> next;
        for (webshell::NodeId n : level) {
            if (webshell::filter_matches(filter, tree.content(n))) out.push_back(n);
            for (webshell::NodeId child : tree.children(n)) next.push_back(child);
        }
        level = std::move(next);
    }
    return out;
}

inline bool equal_trees(const webshell::TagTree& a, webshell::NodeId na,
                        const webshell::TagTree& b, webshell::NodeId nb) {
    if (a.content(na) != b.content(nb)) return false;
    auto ca = a.children(na);
    auto cb = b.children(nb);
    if (ca.size() != cb.size()) return false;
    for (size_t i = 0; i < ca.size(); i++)
        if (!equal_trees(a, ca[i], b, cb[i])) return false;
    return true;
}

inline bool equal_trees(const webshell::TagTree& a, const webshell::TagTree& b) {
    return equal_trees(a, a.root(), b, b.root());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream out;
    out << f.rdbuf();
    return out.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f << content;
}

inline std::vector<std::filesystem::path> corpus_files() {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(WEBSHELL_CORPUS_DIR))
        if (entry.path().extension() == ".html") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; i++) {
            std::filesystem::path candidate =
                base / ("webshell_" + tag + "_" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp directory");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testsupport
