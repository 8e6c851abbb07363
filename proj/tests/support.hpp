#pragma once

// Shared fixtures, generators and reference calculators for the test binaries.
// The reference calculators are written from the textbook formulas and do not
// call into the library.

#include "swifeed/graph.hpp"
#include "swifeed/inp.hpp"
#include "swifeed/radio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace testing {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(SWIFEED_TEST_DATA) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("swifeed_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct RandomGraph {
    std::size_t n = 0;
    std::vector<swifeed::Adjacency::Edge> edges;  // may contain parallel pairs and both orientations
    std::vector<std::string> ids;
};

// Erdos-Renyi-ish multigraph: every pair kept with probability p, then a few
// duplicated (and reversed) edges to exercise saturation.
inline RandomGraph random_graph(std::mt19937_64& gen, std::size_t n, double p) {
    RandomGraph g;
    g.n = n;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        g.ids.push_back("v" + std::to_string(i));
        for (std::size_t j = i + 1; j < n; ++j)
            if (u(gen) < p) g.edges.push_back({i, j});
    }
    const std::size_t dups = g.edges.size() / 10;
    for (std::size_t k = 0; k < dups; ++k) {
        auto e = g.edges[static_cast<std::size_t>(u(gen) * static_cast<double>(g.edges.size()))];
        g.edges.push_back({e.second, e.first});
    }
    return g;
}

// Dense reference matrix built straight from the edge list.
inline std::vector<std::vector<int>> dense_adjacency(const RandomGraph& g) {
    std::vector<std::vector<int>> a(g.n, std::vector<int>(g.n, 0));
    for (auto [u, v] : g.edges) a[u][v] = a[v][u] = 1;
    return a;
}

// Time on air from the Semtech modem design note, floating-point ceiling.
inline double reference_airtime(int sf, int payload, bool explicit_header, double bw = 125e3,
                                int cr = 1, int preamble = 8, bool crc = true) {
    const double tsym = std::pow(2.0, sf) / bw;
    const int de = tsym > 0.016 ? 1 : 0;
    const int ih = explicit_header ? 0 : 1;
    const double num = 8.0 * payload - 4.0 * sf + 28.0 + 16.0 * (crc ? 1 : 0) - 20.0 * ih;
    const double den = 4.0 * (sf - 2.0 * de);
    const double n_payload = 8.0 + std::max(std::ceil(num / den) * (cr + 4), 0.0);
    return (preamble + 4.25) * tsym + n_payload * tsym;
}

// Smallest SF meeting the margin at the best gateway, scanning every SF.
struct ReferenceAdr {
    int sf = 12;
    bool marginal = true;
};

inline ReferenceAdr reference_adr(const std::vector<double>& rssi, double margin,
                                  const std::vector<double>& sensitivity) {
    double best = -1e300;
    for (double r : rssi) best = std::max(best, r);
    ReferenceAdr out;
    for (int sf = 12; sf >= 7; --sf)
        if (sensitivity[static_cast<std::size_t>(sf - 7)] <= best - margin) {
            out.sf = sf;
            out.marginal = false;
        }
    return out;
}

// Builds a network directly from records, bypassing the INP reader.
inline swifeed::WaterNetwork make_network(
    const std::vector<std::pair<std::string, swifeed::Point>>& junctions,
    const std::vector<std::pair<std::string, std::string>>& pipes,
    const std::vector<std::string>& reservoirs = {}) {
    std::ostringstream inp;
    inp << "[JUNCTIONS]\n";
    for (const auto& [id, p] : junctions)
        if (std::find(reservoirs.begin(), reservoirs.end(), id) == reservoirs.end())
            inp << id << " 0 0\n";
    if (!reservoirs.empty()) {
        inp << "[RESERVOIRS]\n";
        for (const auto& r : reservoirs) inp << r << " 100\n";
    }
    inp << "[PIPES]\n";
    int k = 0;
    for (const auto& [a, b] : pipes) inp << "P" << ++k << ' ' << a << ' ' << b << " 100 150 100\n";
    inp << "[COORDINATES]\n";
    for (const auto& [id, p] : junctions) inp << id << ' ' << p.x << ' ' << p.y << '\n';
    return swifeed::build_network(swifeed::tokenize_inp(inp.str()));
}

}  // namespace testing
