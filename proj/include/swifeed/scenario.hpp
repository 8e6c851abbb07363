#pragma once

#include "swifeed/graph.hpp"
#include "swifeed/hydraulics.hpp"
#include "swifeed/inp.hpp"
#include "swifeed/placement.hpp"
#include "swifeed/radio.hpp"
#include "swifeed/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace swifeed {

struct ScenarioConfig {
    std::string name = "scenario";
    std::filesystem::path inp;
    std::optional<std::filesystem::path> hydraulic_nodes;
    std::optional<std::filesystem::path> hydraulic_links;
    NodeFlowSource node_flow_source = NodeFlowSource::incident_link_flow;
    bool flow_proxy_pipe_length = false;
    double alpha = 0.5;
    std::vector<double> alpha_values;  // sweep axis for kpi search

    RadioConfig radio;
    PathLossModel propagation;
    EnergyModel energy;
    TrafficConfig traffic;

    std::vector<std::size_t> gateway_counts = {77, 96, 117, 140, 165};
    std::vector<Strategy> strategies = {Strategy::regular_grid, Strategy::degree_centrality};
    std::vector<std::uint64_t> seeds = {1};
    double horizon_s = 86400.0;
    double battery_sample_interval_s = 3600.0;
    double coordinate_scale = 1.0;

    KMeansOptions kmeans;
    double coverage_radius_m = 1000.0;

    std::filesystem::path output_dir = "out";
    bool write_run_files = true;
    bool write_transmissions = true;
    std::size_t threads = 0;  // 0: hardware concurrency

    /// Throws Error{InvalidConfig}.
    void validate() const;
};

/// Parses a scenario document. Relative paths resolve against `base_dir`;
/// unknown keys are rejected.
ScenarioConfig scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Network, graph and weights shared by every run of a scenario.
struct PreparedNetwork {
    WaterNetwork net;
    Adjacency adj;
    GraphStats stats;
    CentralityVector centrality;
    std::vector<double> flow;
    FlowWeight weights;
    std::vector<std::string> warnings;
};

PreparedNetwork prepare_network(const ScenarioConfig& cfg);

struct RunSummary {
    std::size_t k = 0;
    Strategy strategy = Strategy::regular_grid;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    double energy_j = 0.0;
    double pdr = 0.0;
    double mean_sf = 0.0;
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
};

struct RunArtifacts {
    GatewaySet gateways;
    SimulationResult result;
};

GatewaySet place_gateways(const PreparedNetwork& prepared, const ScenarioConfig& cfg,
                          std::size_t k, Strategy strategy, std::uint64_t seed,
                          const std::vector<double>& weights);

std::vector<Device> devices_of(const WaterNetwork& net);

/// One (K, strategy, seed) run: place, assign SFs, simulate.
RunArtifacts run_once(const PreparedNetwork& prepared, const ScenarioConfig& cfg, std::size_t k,
                      Strategy strategy, std::uint64_t seed, const std::vector<double>& weights);

RunSummary summarize(const RunArtifacts& run, std::size_t k, Strategy strategy,
                     std::uint64_t seed, double alpha);

struct ComparisonRow {
    std::size_t k = 0;
    Strategy strategy = Strategy::regular_grid;
    double energy_j_mean = 0.0;
    double energy_j_std = 0.0;  // sample std over seeds, 0 for one seed
    double pdr = 0.0;
    double mean_sf = 0.0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;  // K ascending, then strategy name
};

/// Groups runs by (K, strategy) and averages over seeds.
ComparisonTable compare(const std::vector<RunSummary>& runs);

struct ScenarioResult {
    ComparisonTable table;
    std::vector<RunSummary> runs;
    std::filesystem::path output_dir;
    std::vector<std::string> warnings;
};

/// Full sweep. Writes every dataset under `<output_dir>/<name>/`.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// `k,strategy,energy_j_mean,energy_j_std,pdr,mean_sf`
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
ComparisonTable read_comparison_csv(std::istream& in);
/// One line per K with the strategies side by side.
std::string comparison_text(const ComparisonTable& table);

/// Conjunction of metric comparisons over a comparison row, e.g.
/// "pdr>=0.9 && energy<=2e5". Metrics: pdr, energy, energy_std, mean_sf.
class KpiPredicate {
public:
    static KpiPredicate parse(const std::string& text);
    bool operator()(const ComparisonRow& row) const;
    const std::string& text() const { return text_; }

private:
    struct Clause {
        std::string metric;
        std::string op;
        double value = 0.0;
    };
    std::vector<Clause> clauses_;
    std::string text_;
};

enum class SweepAxis { k, alpha };

struct KpiPoint {
    double axis_value = 0.0;
    ComparisonRow row;
    bool satisfied = false;
};

struct KpiResult {
    Strategy strategy = Strategy::regular_grid;
    std::optional<double> best;  // nullopt: unsatisfiable over the sweep
    std::vector<KpiPoint> evaluated;
};

/// Linear scan of the sweep axis in ascending order, per strategy; stops at
/// the first point that satisfies the predicate. Throws Error{EmptySweep}.
std::vector<KpiResult> kpi_search(const ScenarioConfig& cfg, const KpiPredicate& predicate,
                                  SweepAxis axis = SweepAxis::k);

nlohmann::json to_json(const std::vector<KpiResult>& results, SweepAxis axis);

}  // namespace swifeed
