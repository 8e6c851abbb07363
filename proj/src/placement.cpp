#include "swifeed/placement.hpp"

#include "swifeed/csv.hpp"
#include "swifeed/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace swifeed {

std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::regular_grid: return "regular_grid";
    case Strategy::degree_centrality: return "degree_centrality";
    case Strategy::max_coverage: return "max_coverage";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    if (name == "regular_grid" || name == "grid") return Strategy::regular_grid;
    if (name == "degree_centrality" || name == "centrality") return Strategy::degree_centrality;
    if (name == "max_coverage" || name == "coverage") return Strategy::max_coverage;
    return std::nullopt;
}

GatewaySet regular_grid_deploy(std::size_t k, const BoundingBox& bbox) {
    if (k == 0) {
        throw Error(ErrorCode::InvalidK, "gateway count must be at least 1");
    }
    const double w = bbox.width();
    const double h = bbox.height();
    if (!(w > 0.0) && !(h > 0.0)) {
        throw Error(ErrorCode::DegenerateBBox, "bounding box has zero width and height");
    }

    std::size_t rows = 1;
    std::size_t cols = k;
    if (!(w > 0.0)) {
        rows = k;
        cols = 1;
    } else if (h > 0.0) {
        const double target = h / w;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 1; r <= k; ++r) {
            const std::size_t c = (k + r - 1) / r;
            if ((r - 1) * c >= k) {
                continue;  // would leave an empty row
            }
            const double score =
                std::abs(static_cast<double>(r) / static_cast<double>(c) - target);
            if (score < best) {
                best = score;
                rows = r;
                cols = c;
            }
        }
    }

    GatewaySet set;
    set.strategy = Strategy::regular_grid;
    set.k = k;
    set.rows = rows;
    set.cols = cols;
    set.positions.reserve(k);
    for (std::size_t idx = 0; idx < k; ++idx) {
        const std::size_t i = idx / cols;
        const std::size_t j = idx % cols;
        set.positions.push_back(
            {bbox.x_min + (static_cast<double>(j) + 0.5) * w / static_cast<double>(cols),
             bbox.y_min + (static_cast<double>(i) + 0.5) * h / static_cast<double>(rows)});
    }
    return set;
}

namespace {

double sq(double v) { return v * v; }

double sq_distance(const Point& a, const Point& b) { return sq(a.x - b.x) + sq(a.y - b.y); }

void check_weights(std::size_t k, std::span<const Point> nodes, std::span<const double> weights) {
    if (k == 0) {
        throw Error(ErrorCode::InvalidK, "gateway count must be at least 1");
    }
    if (k > nodes.size()) {
        throw Error(ErrorCode::KExceedsN, "K = " + std::to_string(k) + " exceeds node count " +
                                              std::to_string(nodes.size()));
    }
    if (weights.size() != nodes.size()) {
        throw Error(ErrorCode::InvalidConfig, "weight vector length does not match node count");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw Error(ErrorCode::InvalidConfig, "weights must be nonnegative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw Error(ErrorCode::AllZeroWeights, "all placement weights are zero");
    }
}

// Index of the nearest center; ties go to the lower index.
std::size_t nearest(const Point& p, std::span<const Point> centers, double* d2 = nullptr) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = sq_distance(p, centers[c]);
        if (d < best_d2) {
            best_d2 = d;
            best = c;
        }
    }
    if (d2 != nullptr) {
        *d2 = best_d2;
    }
    return best;
}

std::vector<Point> farthest_point_seeds(std::size_t k, std::span<const Point> nodes,
                                        std::span<const double> weights) {
    const std::size_t n = nodes.size();
    std::vector<Point> centers;
    std::vector<bool> used(n, false);
    std::size_t first = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (weights[i] > weights[first]) {
            first = i;
        }
    }
    centers.push_back(nodes[first]);
    used[first] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = sq_distance(nodes[i], nodes[first]);
    }
    while (centers.size() < k) {
        // Weighted score first; zero-weight leftovers fall back to plain
        // distance, then to the first unused node.
        std::optional<std::size_t> pick;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!used[i] && weights[i] * d2[i] > best) {
                best = weights[i] * d2[i];
                pick = i;
            }
        }
        if (!pick) {
            best = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!used[i] && d2[i] > best) {
                    best = d2[i];
                    pick = i;
                }
            }
        }
        if (!pick) {
            for (std::size_t i = 0; i < n && !pick; ++i) {
                if (!used[i]) {
                    pick = i;
                }
            }
        }
        used[*pick] = true;
        centers.push_back(nodes[*pick]);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_distance(nodes[i], nodes[*pick]));
        }
    }
    return centers;
}

}  // namespace

double weighted_objective(std::span<const Point> nodes, std::span<const double> weights,
                          std::span<const Point> centers) {
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double d2 = 0.0;
        nearest(nodes[i], centers, &d2);
        total += weights[i] * d2;
    }
    return total;
}

GatewaySet degree_centrality_deploy(std::size_t k, std::span<const Point> nodes,
                                    std::span<const double> weights, std::uint64_t seed,
                                    const KMeansOptions& options) {
    check_weights(k, nodes, weights);
    const std::size_t n = nodes.size();
    const double diagonal = BoundingBox::around({nodes.begin(), nodes.end()}).diagonal();
    const double tolerance = options.tolerance * diagonal;

    GatewaySet set;
    set.strategy = Strategy::degree_centrality;
    set.k = k;
    set.seed = seed;

    std::vector<Point> centers = farthest_point_seeds(k, nodes, weights);
    set.objective_trace.push_back(weighted_objective(nodes, weights, centers));

    std::vector<std::size_t> assignment(n);
    std::vector<double> d2(n);
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            assignment[i] = nearest(nodes[i], centers, &d2[i]);
        }

        std::vector<double> wsum(k, 0.0), wx(k, 0.0), wy(k, 0.0);
        std::vector<std::size_t> members(k, 0);
        std::vector<double> px(k, 0.0), py(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = assignment[i];
            wsum[c] += weights[i];
            wx[c] += weights[i] * nodes[i].x;
            wy[c] += weights[i] * nodes[i].y;
            ++members[c];
            px[c] += nodes[i].x;
            py[c] += nodes[i].y;
        }

        std::vector<Point> next(k);
        std::vector<bool> taken(n, false);
        double displacement = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (wsum[c] > 0.0) {
                next[c] = {wx[c] / wsum[c], wy[c] / wsum[c]};
            } else if (members[c] > 0) {
                // only zero-weight members: they add nothing to the objective
                next[c] = {px[c] / static_cast<double>(members[c]),
                           py[c] / static_cast<double>(members[c])};
            } else {
                // empty cluster: reseed at the worst-served node
                std::optional<std::size_t> pick;
                double best = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!taken[i] && weights[i] * d2[i] > best) {
                        best = weights[i] * d2[i];
                        pick = i;
                    }
                }
                taken[*pick] = true;
                next[c] = nodes[*pick];
            }
            displacement = std::max(displacement, distance(next[c], centers[c]));
        }
        centers = std::move(next);
        set.objective_trace.push_back(weighted_objective(nodes, weights, centers));
        set.iterations = iter + 1;
        if (displacement < tolerance || diagonal == 0.0) {
            break;
        }
    }

    if (options.snap_to_node) {
        for (auto& c : centers) {
            double best = std::numeric_limits<double>::infinity();
            Point snapped = c;
            for (const auto& p : nodes) {
                const double d = sq_distance(p, c);
                if (d < best) {
                    best = d;
                    snapped = p;
                }
            }
            c = snapped;
        }
    }
    set.positions = std::move(centers);
    return set;
}

GatewaySet max_coverage_deploy(std::size_t k, std::span<const Point> nodes,
                               std::span<const double> weights, double radius_m) {
    check_weights(k, nodes, weights);
    if (!(radius_m > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "coverage radius must be positive");
    }
    const std::size_t n = nodes.size();
    const double r2 = radius_m * radius_m;
    std::vector<std::vector<std::size_t>> within(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (sq_distance(nodes[i], nodes[j]) <= r2) {
                within[i].push_back(j);
            }
        }
    }

    GatewaySet set;
    set.strategy = Strategy::max_coverage;
    set.k = k;
    std::vector<bool> covered(n, false);
    std::vector<bool> used(n, false);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    for (std::size_t g = 0; g < k; ++g) {
        std::optional<std::size_t> pick;
        double best_gain = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) {
                continue;
            }
            double gain = 0.0;
            for (auto j : within[i]) {
                if (!covered[j]) {
                    gain += weights[j];
                }
            }
            if (gain > best_gain) {
                best_gain = gain;
                pick = i;
            }
        }
        if (!pick) {
            // everything weighted is covered: spread out instead
            double best = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!used[i] && d2[i] > best) {
                    best = d2[i];
                    pick = i;
                }
            }
        }
        used[*pick] = true;
        for (auto j : within[*pick]) {
            covered[j] = true;
        }
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_distance(nodes[i], nodes[*pick]));
        }
        set.positions.push_back(nodes[*pick]);
    }
    return set;
}

void write_gateways_csv(std::ostream& out, const GatewaySet& set) {
    csv::write_row(out, {"gw_id", "x", "y", "strategy", "k", "seed"});
    for (std::size_t g = 0; g < set.positions.size(); ++g) {
        csv::write_row(out, {std::to_string(g), csv::format_number(set.positions[g].x),
                             csv::format_number(set.positions[g].y),
                             std::string(to_string(set.strategy)), std::to_string(set.k),
                             std::to_string(set.seed)});
    }
}

}  // namespace swifeed
