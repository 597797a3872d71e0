#pragma once

// Fixture generators and reference implementations shared by the unit
// tests and the acceptance runner. Oracles here deliberately avoid the
// library code they check.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "docrepair/media.hpp"

#ifndef DOCREPAIR_FIXTURES
#define DOCREPAIR_FIXTURES "tests/fixtures"
#endif

namespace support {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(DOCREPAIR_FIXTURES) / rel; }

class TempDir {
public:
    TempDir() {
        std::string tpl = (fs::temp_directory_path() / "docrepair-test-XXXXXX").string();
        if (!mkdtemp(tpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

inline void copy_tree(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

// ---------------------------------------------------------------------------
// Python files with a known call graph

struct GeneratedFile {
    std::string content;
    std::vector<std::string> units;                     // top-level names in order
    std::map<std::string, std::set<std::string>> calls;  // caller -> callees, self excluded
    std::map<std::string, std::string> methods;          // method name -> class
};

inline GeneratedFile random_callgraph_file(std::mt19937_64& rng, int n_units) {
    GeneratedFile g;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<bool> is_class(static_cast<std::size_t>(n_units));
    for (int i = 0; i < n_units; ++i) {
        is_class[static_cast<std::size_t>(i)] = coin(rng) < 0.3;
        g.units.push_back((is_class[static_cast<std::size_t>(i)] ? "C" : "f") + std::to_string(i));
    }
    auto pick = [&](int self) {
        std::uniform_int_distribution<int> any(0, n_units - 1);
        return any(rng) == self && n_units > 1 ? (self + 1) % n_units : any(rng);
    };

    // Call lines; noise mentions never create an edge.
    auto body = [&](int self, const std::string& indent) {
        std::vector<std::string> lines;
        std::uniform_int_distribution<int> ncalls(0, 3);
        const int n = ncalls(rng);
        for (int c = 0; c < n; ++c) {
            const int j = pick(self);
            const auto& name = g.units[static_cast<std::size_t>(j)];
            if (j != self) g.calls[g.units[static_cast<std::size_t>(self)]].insert(name);
            if (is_class[static_cast<std::size_t>(j)])
                lines.push_back(indent + (coin(rng) < 0.5 ? "obj = " + name + "()" : "lim = " + name + ".LIMIT"));
            else
                lines.push_back(indent + "v" + std::to_string(c) + " = " + name + "(" + std::to_string(c) + ")");
        }
        const auto& other = g.units[static_cast<std::size_t>(pick(self))];
        const double r = coin(rng);
        if (r < 0.25) lines.push_back(indent + "# see " + other + "() for details");
        else if (r < 0.5) lines.push_back(indent + "msg = \"" + other + "(x) failed\"");
        else if (r < 0.75) lines.push_back(indent + "alias = " + other);
        else lines.push_back(indent + "res = handle." + other + "(1)");
        lines.push_back(indent + "return len(\"done\")");
        return lines;
    };

    std::string& out = g.content;
    out += "import os\nfrom typing import List\n\nLIMIT = 10\n";
    for (int i = 0; i < n_units; ++i) {
        const auto& name = g.units[static_cast<std::size_t>(i)];
        out += "\n\n";
        if (is_class[static_cast<std::size_t>(i)]) {
            out += "class " + name + ":\n    LIMIT = 3\n";
            const std::string method = "m" + std::to_string(i);
            g.methods[method] = name;
            out += "\n    def " + method + "(self, x):\n";
            for (const auto& l : body(i, "        ")) out += l + "\n";
            if (coin(rng) < 0.5) out += "\n    def helper(self):\n        return self." + method + "(1)\n";
        } else {
            out += "def " + name + "(a, b=None):\n";
            if (coin(rng) < 0.3) out += "    \"\"\"Mentions " + g.units[0] + "() in prose.\"\"\"\n";
            if (coin(rng) < 0.1) out += "    " + name + "(a)\n";  // recursion is not an edge
            for (const auto& l : body(i, "    ")) out += l + "\n";
        }
        if (coin(rng) < 0.15) out += "\n\nif LIMIT > 3:\n    " + g.units[0] + "(LIMIT)\n";
    }
    if (coin(rng) < 0.3) out.pop_back();  // no final newline
    return g;
}

/// Localized roots plus their direct callees, by the generator's own graph.
inline std::set<std::string> one_hop_oracle(const GeneratedFile& g, const std::vector<std::string>& localized) {
    std::set<std::string> roots;
    for (const auto& name : localized) {
        const auto dot = name.find('.');
        if (dot != std::string::npos) roots.insert(name.substr(0, dot));
        else if (g.methods.count(name)) roots.insert(g.methods.at(name));
        else roots.insert(name);
    }
    std::set<std::string> kept = roots;
    for (const auto& r : roots) {
        auto it = g.calls.find(r);
        if (it != g.calls.end()) kept.insert(it->second.begin(), it->second.end());
    }
    return kept;
}

// ---------------------------------------------------------------------------
// SSIM by the textbook formula over raw moments in long double

inline double reference_ssim(const docrepair::Frame& a, const docrepair::Frame& b) {
    const auto& x = a.pixels();
    const auto& y = b.pixels();
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    const long double n = static_cast<long double>(x.size());
    const long double mx = sx / n, my = sy / n;
    const long double vx = sxx / n - mx * mx, vy = syy / n - my * my, cxy = sxy / n - mx * my;
    const long double c1 = 0.01L * 0.01L, c2 = 0.03L * 0.03L;
    return static_cast<double>(((2 * mx * my + c1) * (2 * cxy + c2)) /
                               ((mx * mx + my * my + c1) * (vx + vy + c2)));
}

inline docrepair::Frame random_frame(std::mt19937_64& rng, int w, int h) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (auto& p : px) p = u(rng);
    return docrepair::Frame(w, h, std::move(px));
}

/// Smooth gradient plus noise, so pairs have structure in common.
inline docrepair::Frame textured_frame(std::mt19937_64& rng, int w, int h, double noise) {
    std::normal_distribution<double> n(0.0, noise);
    std::vector<double> px;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            px.push_back(std::clamp(0.5 + 0.4 * std::sin(x * 0.3) * std::cos(y * 0.2) + n(rng), 0.0, 1.0));
    return docrepair::Frame(w, h, std::move(px));
}

// ---------------------------------------------------------------------------
// Text fixtures for the patch engine

inline std::string random_line(std::mt19937_64& rng) {
    static const char* words[] = {"alpha", "beta", "x", "return", "if", "(", ")", "=", "value", "0", "1", "#"};
    std::uniform_int_distribution<int> nwords(1, 5), w(0, 11), indent(0, 2);
    std::string line(static_cast<std::size_t>(indent(rng) * 4), ' ');
    const int n = nwords(rng);
    for (int i = 0; i < n; ++i) line += std::string(i ? " " : "") + words[w(rng)];
    return line + "\n";
}

inline std::vector<std::string> random_lines(std::mt19937_64& rng, int lo, int hi) {
    std::uniform_int_distribution<int> n(lo, hi);
    std::vector<std::string> lines(static_cast<std::size_t>(n(rng)));
    for (auto& l : lines) l = random_line(rng);
    return lines;
}

inline std::string join(const std::vector<std::string>& lines, std::size_t from, std::size_t to) {
    std::string s;
    for (std::size_t i = from; i < to; ++i) s += lines[i];
    return s;
}

}  // namespace support

namespace support {

/// Mock that answers every documentation request with well-formed
/// sections derived from the unit name in the prompt.
inline std::shared_ptr<docrepair::MockProvider> doc_mock() {
    auto mock = std::make_shared<docrepair::MockProvider>();
    mock->set_handler([](const docrepair::LlmRequest& req) -> std::optional<std::string> {
        if (req.stage != docrepair::Stage::doc_gen) return std::nullopt;
        const std::string text = req.joined_text();
        if (text.find("### ARCHITECTURAL ROLE") != std::string::npos) {
            const auto at = text.find("File: ");
            const auto path = text.substr(at + 6, text.find('\n', at) - at - 6);
            return "### ARCHITECTURAL ROLE\nModule " + path + " of the package.\n";
        }
        const auto at = text.find("Unit: ");
        const auto name = text.substr(at + 6, text.find('\n', at) - at - 6);
        return "### PARAMETERS\nnone\n### DESCRIPTION\nDoes the work of " + name +
               ".\n### USAGE NOTES\nnone\n### OUTPUT EXAMPLES\nnone\n";
    });
    return mock;
}

}  // namespace support
