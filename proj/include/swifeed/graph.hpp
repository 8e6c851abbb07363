#pragma once

#include "swifeed/inp.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace swifeed {

/// Undirected simple graph in compressed sparse row form. Neighbor lists are
/// sorted and free of duplicates and self-edges, so a_ij saturates at 1.
class Adjacency {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    /// Throws Error{TooFewNodes} when n < 2 and Error{SelfLoop} for (i, i).
    static Adjacency from_edges(std::size_t n, std::span<const Edge> edges,
                                std::vector<std::string> ids = {});

    std::size_t size() const { return ids_.size(); }
    std::size_t edge_count() const { return neighbors_.size() / 2; }
    std::span<const std::size_t> neighbors(std::size_t i) const;
    std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
    bool has_edge(std::size_t i, std::size_t j) const;
    const std::string& id(std::size_t i) const { return ids_[i]; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> neighbors_;
    std::vector<std::string> ids_;
};

/// Every pipe, pump and valve contributes an edge between its endpoints.
Adjacency build_adjacency(const WaterNetwork& net);

struct CentralityVector {
    std::vector<std::size_t> degree;
    std::vector<double> centrality;  // degree / (N - 1)
    std::vector<double> weight;      // placement weight, initialized to centrality
};

CentralityVector degree_centrality(const Adjacency& adj);

struct GraphStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t min_degree = 0;
    std::size_t max_degree = 0;
    double mean_degree = 0.0;
    std::size_t components = 0;
};

GraphStats graph_stats(const Adjacency& adj);

/// `node_id,degree,centrality`, one row per node in index order.
void write_centrality_csv(std::ostream& out, const Adjacency& adj, const CentralityVector& cv);

}  // namespace swifeed
