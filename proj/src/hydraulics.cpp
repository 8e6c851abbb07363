#include "swifeed/hydraulics.hpp"

#include "swifeed/csv.hpp"
#include "swifeed/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <queue>
#include <unordered_map>

namespace swifeed {

namespace {

struct LongTable {
    std::vector<double> timestamps;
    std::vector<std::size_t> element;                   // network index per series
    std::vector<std::vector<std::vector<double>>> values;  // [column][series][t]
};

// Reads a long-format table (time, id, value columns) into dense series.
template <typename Resolve>
LongTable read_long_table(std::istream& in, std::string_view source, std::string_view id_column,
                          const std::vector<std::string>& value_columns, Resolve resolve) {
    auto table = csv::read_table(in, source);
    auto time_col = table.column("time_s");
    auto id_col = table.column(id_column);
    if (!time_col || !id_col) {
        throw Error(ErrorCode::SchemaMismatch, std::string(source) + ": missing column '" +
                                                   std::string(!time_col ? "time_s" : id_column) +
                                                   "'");
    }
    std::vector<std::size_t> value_cols;
    for (const auto& name : value_columns) {
        auto c = table.column(name);
        if (!c) {
            throw Error(ErrorCode::SchemaMismatch,
                        std::string(source) + ": missing column '" + name + "'");
        }
        value_cols.push_back(*c);
    }

    LongTable out;
    out.values.resize(value_cols.size());
    std::unordered_map<std::size_t, std::size_t> series_of;
    std::vector<std::vector<bool>> filled;

    auto where = [&](std::size_t row) {
        return std::string(source) + ":" + std::to_string(table.line_numbers[row]);
    };

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto t = csv::parse_number(row[*time_col]);
        if (!t) {
            throw Error(ErrorCode::SchemaMismatch, where(r) + ": bad time_s '" + row[*time_col] + "'");
        }
        if (out.timestamps.empty() || *t > out.timestamps.back()) {
            out.timestamps.push_back(*t);
            for (std::size_t s = 0; s < out.element.size(); ++s) {
                for (auto& col : out.values) {
                    col[s].push_back(0.0);
                }
                filled[s].push_back(false);
            }
        } else if (*t < out.timestamps.back()) {
            throw Error(ErrorCode::NonMonotoneTimestamps,
                        where(r) + ": time " + row[*time_col] + " after " +
                            csv::format_number(out.timestamps.back()));
        }
        const std::size_t element = resolve(row[*id_col], where(r));
        auto [it, inserted] = series_of.emplace(element, out.element.size());
        if (inserted) {
            if (out.timestamps.size() > 1) {
                throw Error(ErrorCode::SchemaMismatch,
                            where(r) + ": series '" + row[*id_col] + "' missing earlier timestamps");
            }
            out.element.push_back(element);
            for (auto& col : out.values) {
                col.emplace_back(out.timestamps.size(), 0.0);
            }
            filled.emplace_back(out.timestamps.size(), false);
        }
        const std::size_t s = it->second;
        const std::size_t ti = out.timestamps.size() - 1;
        if (filled[s][ti]) {
            throw Error(ErrorCode::SchemaMismatch,
                        where(r) + ": duplicate row for '" + row[*id_col] + "'");
        }
        filled[s][ti] = true;
        for (std::size_t c = 0; c < value_cols.size(); ++c) {
            auto v = csv::parse_number(row[value_cols[c]]);
            if (!v) {
                throw Error(ErrorCode::SchemaMismatch, where(r) + ": bad value '" +
                                                           row[value_cols[c]] + "'");
            }
            out.values[c][s][ti] = *v;
        }
    }
    for (std::size_t s = 0; s < filled.size(); ++s) {
        if (std::find(filled[s].begin(), filled[s].end(), false) != filled[s].end()) {
            throw Error(ErrorCode::SchemaMismatch,
                        std::string(source) + ": incomplete series for element #" +
                            std::to_string(out.element[s]));
        }
    }
    return out;
}

}  // namespace

HydraulicSeries ingest_hydraulic_csv(std::istream& node_csv, std::istream& link_csv,
                                     const WaterNetwork& net) {
    auto nodes = read_long_table(
        node_csv, "node csv", "node_id", {"pressure", "demand"},
        [&](const std::string& id, const std::string& where) {
            auto i = net.find_node(id);
            if (!i) {
                throw Error(ErrorCode::UnknownId, where + ": unknown node '" + id + "'");
            }
            return *i;
        });
    auto links = read_long_table(
        link_csv, "link csv", "link_id", {"flow"},
        [&](const std::string& id, const std::string& where) {
            auto i = net.find_link(id);
            if (!i) {
                throw Error(ErrorCode::UnknownId, where + ": unknown link '" + id + "'");
            }
            return *i;
        });

    if (!nodes.timestamps.empty() && !links.timestamps.empty() &&
        nodes.timestamps != links.timestamps) {
        throw Error(ErrorCode::SchemaMismatch, "node and link files have different timestamps");
    }

    HydraulicSeries series;
    series.timestamps = !nodes.timestamps.empty() ? nodes.timestamps : links.timestamps;
    series.node_index = std::move(nodes.element);
    series.pressure = std::move(nodes.values[0]);
    series.demand = std::move(nodes.values[1]);
    series.link_index = std::move(links.element);
    series.flow = std::move(links.values[0]);
    std::vector<double> sum(net.node_count(), 0.0);
    const auto steps = series.timestamps.size();
    if (steps > 0) {
        for (std::size_t s = 0; s < series.link_index.size(); ++s) {
            const auto& link = net.links[series.link_index[s]];
            double total = 0.0;
            for (double q : series.flow[s]) {
                total += std::abs(q);
            }
            const double mean_half = total / static_cast<double>(steps) / 2.0;
            sum[link.from_index] += mean_half;
            sum[link.to_index] += mean_half;
        }
    }
    series.node_flow = std::move(sum);
    return series;
}

HydraulicSeries ingest_hydraulic_csv(const std::string& node_path, const std::string& link_path,
                                     const WaterNetwork& net) {
    std::ifstream nodes(node_path);
    if (!nodes) {
        throw Error(ErrorCode::Io, "cannot open '" + node_path + "'");
    }
    std::ifstream links(link_path);
    if (!links) {
        throw Error(ErrorCode::Io, "cannot open '" + link_path + "'");
    }
    return ingest_hydraulic_csv(nodes, links, net);
}

void write_node_series_csv(std::ostream& out, const HydraulicSeries& series,
                           const WaterNetwork& net) {
    csv::write_row(out, {"time_s", "node_id", "pressure", "demand"});
    for (std::size_t t = 0; t < series.timestamps.size(); ++t) {
        for (std::size_t s = 0; s < series.node_index.size(); ++s) {
            csv::write_row(out, {csv::format_number(series.timestamps[t]),
                                 net.nodes[series.node_index[s]].id,
                                 csv::format_number(series.pressure[s][t]),
                                 csv::format_number(series.demand[s][t])});
        }
    }
}

void write_link_series_csv(std::ostream& out, const HydraulicSeries& series,
                           const WaterNetwork& net) {
    csv::write_row(out, {"time_s", "link_id", "flow"});
    for (std::size_t t = 0; t < series.timestamps.size(); ++t) {
        for (std::size_t s = 0; s < series.link_index.size(); ++s) {
            csv::write_row(out, {csv::format_number(series.timestamps[t]),
                                 net.links[series.link_index[s]].id,
                                 csv::format_number(series.flow[s][t])});
        }
    }
}

std::vector<double> node_flow(const HydraulicSeries& series, std::size_t node_count,
                              NodeFlowSource source) {
    if (source == NodeFlowSource::incident_link_flow) {
        return series.node_flow.size() == node_count ? series.node_flow
                                                     : std::vector<double>(node_count, 0.0);
    }
    std::vector<double> out(node_count, 0.0);
    const auto& values = source == NodeFlowSource::mean_demand ? series.demand : series.pressure;
    for (std::size_t s = 0; s < series.node_index.size(); ++s) {
        if (values[s].empty()) {
            continue;
        }
        double total = 0.0;
        for (double v : values[s]) {
            total += std::abs(v);
        }
        out[series.node_index[s]] = total / static_cast<double>(values[s].size());
    }
    return out;
}

FlowProxyResult flow_proxy(const WaterNetwork& net, const Adjacency& adj,
                           const FlowProxyOptions& options) {
    const std::size_t n = net.node_count();
    constexpr auto npos = std::numeric_limits<std::size_t>::max();

    std::vector<std::size_t> sources;
    for (std::size_t i = 0; i < n; ++i) {
        if (net.nodes[i].kind != NodeKind::junction) {
            sources.push_back(i);
        }
    }
    if (sources.empty()) {
        throw Error(ErrorCode::NoSource, "network has no reservoir or tank");
    }

    FlowProxyResult result;
    result.flow.assign(n, 0.0);
    result.source_of.assign(n, npos);
    std::vector<std::size_t> parent(n, npos);
    std::vector<std::size_t> order;  // discovery order, parents before children
    order.reserve(n);

    if (!options.use_pipe_length) {
        std::queue<std::size_t> frontier;
        for (auto s : sources) {
            result.source_of[s] = s;
            frontier.push(s);
        }
        while (!frontier.empty()) {
            const auto u = frontier.front();
            frontier.pop();
            order.push_back(u);
            for (auto v : adj.neighbors(u)) {
                if (result.source_of[v] == npos) {
                    result.source_of[v] = result.source_of[u];
                    parent[v] = u;
                    frontier.push(v);
                }
            }
        }
    } else {
        // Edge length = shortest parallel pipe; pumps and valves count as 0.
        std::unordered_map<std::uint64_t, double> length;
        for (const auto& l : net.links) {
            const auto a = std::min(l.from_index, l.to_index);
            const auto b = std::max(l.from_index, l.to_index);
            const std::uint64_t key = static_cast<std::uint64_t>(a) * n + b;
            const double len = l.kind == LinkKind::pipe ? l.length : 0.0;
            auto [it, inserted] = length.emplace(key, len);
            if (!inserted) {
                it->second = std::min(it->second, len);
            }
        }
        auto edge_length = [&](std::size_t a, std::size_t b) {
            const std::uint64_t key = static_cast<std::uint64_t>(std::min(a, b)) * n + std::max(a, b);
            return length.at(key);
        };
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (auto s : sources) {
            dist[s] = 0.0;
            result.source_of[s] = s;
            heap.emplace(0.0, s);
        }
        std::vector<bool> done(n, false);
        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (done[u]) {
                continue;
            }
            done[u] = true;
            order.push_back(u);
            for (auto v : adj.neighbors(u)) {
                const double nd = d + edge_length(u, v);
                if (nd < dist[v]) {
                    dist[v] = nd;
                    parent[v] = u;
                    result.source_of[v] = result.source_of[u];
                    heap.emplace(nd, v);
                }
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (net.nodes[i].kind == NodeKind::junction) {
            if (result.source_of[i] != npos) {
                result.flow[i] = net.nodes[i].base_demand;
            } else if (net.nodes[i].base_demand > 0.0) {
                result.unreachable.push_back(i);
            }
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (parent[*it] != npos) {
            result.flow[parent[*it]] += result.flow[*it];
        }
    }
    if (!result.unreachable.empty()) {
        std::string msg = "UnreachableDemand: " + std::to_string(result.unreachable.size()) +
                          " junction(s) with demand have no path to a source:";
        for (std::size_t k = 0; k < result.unreachable.size() && k < 10; ++k) {
            msg += " " + net.nodes[result.unreachable[k]].id;
        }
        if (result.unreachable.size() > 10) {
            msg += " ...";
        }
        result.warnings.push_back(std::move(msg));
    }
    return result;
}

FlowWeight placement_weights(CentralityVector& cv, std::span<const double> flows, double alpha) {
    const std::size_t n = cv.centrality.size();
    if (flows.size() != n) {
        throw Error(ErrorCode::InvalidConfig, "flow vector has " + std::to_string(flows.size()) +
                                                  " entries for " + std::to_string(n) + " nodes");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "alpha must lie in [0, 1]");
    }
    double max_flow = 0.0;
    for (double f : flows) {
        if (!(f >= 0.0)) {
            throw Error(ErrorCode::InvalidConfig, "flows must be nonnegative");
        }
        max_flow = std::max(max_flow, f);
    }
    const double max_c = n > 0 ? *std::max_element(cv.centrality.begin(), cv.centrality.end()) : 0.0;

    FlowWeight fw;
    fw.normalized_flow.resize(n);
    fw.weight.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = max_flow > 0.0 ? flows[i] / max_flow : 0.0;
        const double c = max_c > 0.0 ? cv.centrality[i] / max_c : 0.0;
        fw.normalized_flow[i] = f;
        fw.weight[i] = alpha * c + (1.0 - alpha) * f;
    }
    cv.weight = fw.weight;
    return fw;
}

}  // namespace swifeed
