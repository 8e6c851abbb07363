#pragma once

#include "swifeed/inp.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace swifeed {

enum class Strategy { regular_grid, degree_centrality, max_coverage };

std::string_view to_string(Strategy s);
/// Accepts the canonical names plus the short CLI forms grid|centrality|coverage.
std::optional<Strategy> parse_strategy(std::string_view name);

struct GatewaySet {
    Strategy strategy = Strategy::regular_grid;
    std::size_t k = 0;
    std::vector<Point> positions;

    // provenance
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::size_t rows = 0;  // grid only
    std::size_t cols = 0;
    std::size_t iterations = 0;           // k-means only
    std::vector<double> objective_trace;  // k-means objective after init and each iteration
};

/// Aspect-matched r x c grid over the box, first K cell centers in row-major
/// order from the bottom-left. Throws Error{InvalidK, DegenerateBBox}.
GatewaySet regular_grid_deploy(std::size_t k, const BoundingBox& bbox);

struct KMeansOptions {
    std::size_t max_iterations = 100;
    double tolerance = 1e-6;  // fraction of the point-set diagonal
    bool snap_to_node = false;
};

/// Weighted k-means over node positions with deterministic weighted
/// farthest-point seeding. Throws Error{InvalidK, KExceedsN, AllZeroWeights}.
GatewaySet degree_centrality_deploy(std::size_t k, std::span<const Point> nodes,
                                    std::span<const double> weights, std::uint64_t seed,
                                    const KMeansOptions& options = {});

/// Greedy weighted max-coverage: each gateway goes to the node position that
/// covers the most still-uncovered weight within `radius_m`.
GatewaySet max_coverage_deploy(std::size_t k, std::span<const Point> nodes,
                               std::span<const double> weights, double radius_m);

/// sum_i w_i * (distance from node i to its nearest center)^2
double weighted_objective(std::span<const Point> nodes, std::span<const double> weights,
                          std::span<const Point> centers);

/// `gw_id,x,y,strategy,k,seed`
void write_gateways_csv(std::ostream& out, const GatewaySet& set);

}  // namespace swifeed
