#pragma once

#include "swifeed/graph.hpp"
#include "swifeed/inp.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace swifeed {

/// Time series ingested from an external hydraulic solver run (long-format
/// CSV, one row per timestamp and element). Series are indexed in order of
/// first appearance; `*_index` maps each series to its network element.
struct HydraulicSeries {
    std::vector<double> timestamps;

    std::vector<std::size_t> node_index;
    std::vector<std::vector<double>> pressure;  // [series][timestamp]
    std::vector<std::vector<double>> demand;

    std::vector<std::size_t> link_index;
    std::vector<std::vector<double>> flow;

    /// Per network node: time-mean of (sum of |incident link flow|) / 2.
    std::vector<double> node_flow;
};

/// Node file `time_s,node_id,pressure,demand`; link file `time_s,link_id,flow`.
/// Extra columns are ignored. Throws Error{SchemaMismatch, UnknownId,
/// NonMonotoneTimestamps}.
HydraulicSeries ingest_hydraulic_csv(std::istream& node_csv, std::istream& link_csv,
                                     const WaterNetwork& net);
HydraulicSeries ingest_hydraulic_csv(const std::string& node_path, const std::string& link_path,
                                     const WaterNetwork& net);

void write_node_series_csv(std::ostream& out, const HydraulicSeries& series,
                           const WaterNetwork& net);
void write_link_series_csv(std::ostream& out, const HydraulicSeries& series,
                           const WaterNetwork& net);

/// Which per-node quantity stands for "hydraulic flow" at a node.
enum class NodeFlowSource { incident_link_flow, mean_demand, mean_pressure };

std::vector<double> node_flow(const HydraulicSeries& series, std::size_t node_count,
                              NodeFlowSource source);

struct FlowProxyOptions {
    bool use_pipe_length = false;  // hop count when false
};

struct FlowProxyResult {
    std::vector<double> flow;              // per node
    std::vector<std::size_t> source_of;    // serving source node, or npos
    std::vector<std::size_t> unreachable;  // junctions with demand and no path to a source
    std::vector<std::string> warnings;
};

/// Topology-only stand-in for hydraulic results: each junction's base demand
/// travels along the shortest path to its nearest reservoir or tank, and a
/// node's proxy flow is the total demand passing through it.
/// Throws Error{NoSource} when the network has no reservoir or tank.
FlowProxyResult flow_proxy(const WaterNetwork& net, const Adjacency& adj,
                           const FlowProxyOptions& options = {});

struct FlowWeight {
    std::vector<double> normalized_flow;  // f_i = flow_i / max flow, or 0
    std::vector<double> weight;           // alpha * c_i/max c + (1 - alpha) * f_i
};

/// Blends centrality and flow into placement weights and stores the result
/// in `cv.weight`.
FlowWeight placement_weights(CentralityVector& cv, std::span<const double> flows, double alpha);

}  // namespace swifeed
