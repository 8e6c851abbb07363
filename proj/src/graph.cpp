#include "swifeed/graph.hpp"

#include "swifeed/csv.hpp"
#include "swifeed/error.hpp"

#include <algorithm>
#include <ostream>
#include <queue>

namespace swifeed {

Adjacency Adjacency::from_edges(std::size_t n, std::span<const Edge> edges,
                                std::vector<std::string> ids) {
    if (n < 2) {
        throw Error(ErrorCode::TooFewNodes,
                    "graph needs at least 2 nodes, got " + std::to_string(n));
    }
    if (ids.empty()) {
        ids.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            ids.push_back(std::to_string(i));
        }
    } else if (ids.size() != n) {
        throw Error(ErrorCode::InvalidConfig, "id list length does not match node count");
    }

    std::vector<std::vector<std::size_t>> lists(n);
    for (const auto& [a, b] : edges) {
        if (a >= n || b >= n) {
            throw Error(ErrorCode::DanglingEndpoint, "edge endpoint out of range");
        }
        if (a == b) {
            throw Error(ErrorCode::SelfLoop, "self-edge at node " + ids[a]);
        }
        lists[a].push_back(b);
        lists[b].push_back(a);
    }

    Adjacency adj;
    adj.ids_ = std::move(ids);
    adj.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& l = lists[i];
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
        adj.offsets_[i + 1] = adj.offsets_[i] + l.size();
    }
    adj.neighbors_.reserve(adj.offsets_[n]);
    for (const auto& l : lists) {
        adj.neighbors_.insert(adj.neighbors_.end(), l.begin(), l.end());
    }
    return adj;
}

std::span<const std::size_t> Adjacency::neighbors(std::size_t i) const {
    return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

bool Adjacency::has_edge(std::size_t i, std::size_t j) const {
    auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
}

Adjacency build_adjacency(const WaterNetwork& net) {
    std::vector<Adjacency::Edge> edges;
    edges.reserve(net.links.size());
    for (const auto& l : net.links) {
        edges.emplace_back(l.from_index, l.to_index);
    }
    std::vector<std::string> ids;
    ids.reserve(net.nodes.size());
    for (const auto& n : net.nodes) {
        ids.push_back(n.id);
    }
    return Adjacency::from_edges(net.node_count(), edges, std::move(ids));
}

CentralityVector degree_centrality(const Adjacency& adj) {
    const std::size_t n = adj.size();
    const auto max_degree = static_cast<double>(n - 1);
    CentralityVector cv;
    cv.degree.resize(n);
    cv.centrality.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cv.degree[i] = adj.degree(i);
        cv.centrality[i] = static_cast<double>(cv.degree[i]) / max_degree;
    }
    cv.weight = cv.centrality;
    return cv;
}

GraphStats graph_stats(const Adjacency& adj) {
    const std::size_t n = adj.size();
    GraphStats s;
    s.nodes = n;
    s.edges = adj.edge_count();
    s.min_degree = n > 0 ? adj.degree(0) : 0;
    std::size_t degree_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        s.min_degree = std::min(s.min_degree, adj.degree(i));
        s.max_degree = std::max(s.max_degree, adj.degree(i));
        degree_sum += adj.degree(i);
    }
    s.mean_degree = n > 0 ? static_cast<double>(degree_sum) / static_cast<double>(n) : 0.0;

    std::vector<bool> seen(n, false);
    std::queue<std::size_t> frontier;
    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start]) {
            continue;
        }
        ++s.components;
        seen[start] = true;
        frontier.push(start);
        while (!frontier.empty()) {
            const auto u = frontier.front();
            frontier.pop();
            for (auto v : adj.neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = true;
                    frontier.push(v);
                }
            }
        }
    }
    return s;
}

void write_centrality_csv(std::ostream& out, const Adjacency& adj, const CentralityVector& cv) {
    csv::write_row(out, {"node_id", "degree", "centrality"});
    for (std::size_t i = 0; i < adj.size(); ++i) {
        csv::write_row(out, {adj.id(i), std::to_string(cv.degree[i]),
                             csv::format_number(cv.centrality[i])});
    }
}

}  // namespace swifeed
