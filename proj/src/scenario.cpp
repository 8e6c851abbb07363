#include "swifeed/scenario.hpp"

#include "swifeed/csv.hpp"
#include "swifeed/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace swifeed {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) {
        bad_config(std::string(where) + " must be a JSON object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            bad_config("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            bad_config(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

void parse_radio(const json& j, RadioConfig& r) {
    check_keys(j, "radio",
               {"bandwidth_hz", "coding_rate", "preamble_symbols", "explicit_header", "payload_bytes",
                "tx_power_dbm", "channels_hz", "duty_cycle_limit", "sensitivity_dbm",
                "required_snr_db", "adr_margin_db", "capture_threshold_db"});
    read(j, "bandwidth_hz", r.bandwidth_hz);
    read(j, "coding_rate", r.coding_rate);
    read(j, "preamble_symbols", r.preamble_symbols);
    read(j, "explicit_header", r.explicit_header);
    read(j, "payload_bytes", r.payload_bytes);
    read(j, "tx_power_dbm", r.tx_power_dbm);
    read(j, "channels_hz", r.channels_hz);
    read(j, "duty_cycle_limit", r.duty_cycle_limit);
    read(j, "sensitivity_dbm", r.sensitivity_dbm);
    read(j, "required_snr_db", r.required_snr_db);
    read(j, "adr_margin_db", r.adr_margin_db);
    read(j, "capture_threshold_db", r.capture_threshold_db);
}

void parse_propagation(const json& j, PathLossModel& m) {
    check_keys(j, "propagation",
               {"reference_loss_db", "reference_distance_m", "exponent", "shadowing_sigma_db",
                "min_distance_m"});
    read(j, "reference_loss_db", m.reference_loss_db);
    read(j, "reference_distance_m", m.reference_distance_m);
    read(j, "exponent", m.exponent);
    read(j, "shadowing_sigma_db", m.shadowing_sigma_db);
    read(j, "min_distance_m", m.min_distance_m);
}

void parse_energy(const json& j, EnergyModel& e) {
    check_keys(j, "energy",
               {"supply_voltage_v", "tx_current_a", "initial_battery_j", "include_rx_windows",
                "rx_current_a", "rx_windows"});
    read(j, "supply_voltage_v", e.supply_voltage_v);
    if (auto it = j.find("tx_current_a"); it != j.end()) {
        // {"14": 0.028, ...} keyed by dBm
        if (!it->is_object()) {
            bad_config("energy.tx_current_a must map dBm to amperes");
        }
        e.tx_current_a.clear();
        for (const auto& [dbm, amps] : it->items()) {
            auto p = csv::parse_number(dbm);
            if (!p || !amps.is_number()) {
                bad_config("bad energy.tx_current_a entry '" + dbm + "'");
            }
            e.tx_current_a.emplace_back(*p, amps.get<double>());
        }
    }
    read(j, "initial_battery_j", e.initial_battery_j);
    read(j, "include_rx_windows", e.include_rx_windows);
    read(j, "rx_current_a", e.rx_current_a);
    read(j, "rx_windows", e.rx_windows);
}

void parse_traffic(const json& j, TrafficConfig& t) {
    check_keys(j, "traffic", {"model", "period_s", "jitter_s"});
    std::string model = "poisson";
    read(j, "model", model);
    if (model == "poisson") {
        t.model = TrafficModel::poisson;
    } else if (model == "periodic") {
        t.model = TrafficModel::periodic;
    } else {
        bad_config("traffic.model must be poisson or periodic");
    }
    read(j, "period_s", t.period_s);
    read(j, "jitter_s", t.jitter_s);
}

}  // namespace

void ScenarioConfig::validate() const {
    if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
        bad_config("scenario name must be a plain, non-empty file name");
    }
    if (inp.empty()) {
        bad_config("scenario needs an 'inp' path");
    }
    if (hydraulic_nodes.has_value() != hydraulic_links.has_value()) {
        bad_config("hydraulic input needs both 'nodes' and 'links' files");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        bad_config("alpha must lie in [0, 1]");
    }
    for (double a : alpha_values) {
        if (!(a >= 0.0 && a <= 1.0)) {
            bad_config("alpha_values must lie in [0, 1]");
        }
    }
    if (gateway_counts.empty()) {
        bad_config("gateway_counts must not be empty");
    }
    for (std::size_t i = 0; i < gateway_counts.size(); ++i) {
        if (gateway_counts[i] == 0 || (i > 0 && gateway_counts[i] <= gateway_counts[i - 1])) {
            bad_config("gateway_counts must be positive and strictly increasing");
        }
    }
    if (strategies.empty()) {
        bad_config("at least one strategy is required");
    }
    if (seeds.empty()) {
        bad_config("at least one seed is required");
    }
    if (!(horizon_s >= 0.0)) {
        bad_config("horizon_s must be nonnegative");
    }
    if (!(coordinate_scale > 0.0)) {
        bad_config("coordinate_scale must be positive");
    }
    radio.validate();
    propagation.validate();
    energy.validate();
    energy.tx_current(radio.tx_power_dbm);
}

ScenarioConfig scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
    check_keys(doc, "scenario",
               {"name", "inp", "hydraulic", "node_flow", "flow_proxy_pipe_length", "alpha",
                "alpha_values", "radio", "propagation", "energy", "traffic", "gateway_counts",
                "strategies", "seeds", "horizon_s", "battery_sample_interval_s",
                "coordinate_scale", "placement", "output_dir", "export", "threads"});
    ScenarioConfig cfg;
    read(doc, "name", cfg.name);
    std::string inp;
    read(doc, "inp", inp);
    if (!inp.empty()) {
        cfg.inp = resolve(base_dir, inp);
    }
    if (auto it = doc.find("hydraulic"); it != doc.end() && !it->is_null()) {
        check_keys(*it, "hydraulic", {"nodes", "links"});
        std::string nodes, links;
        read(*it, "nodes", nodes);
        read(*it, "links", links);
        if (!nodes.empty()) cfg.hydraulic_nodes = resolve(base_dir, nodes);
        if (!links.empty()) cfg.hydraulic_links = resolve(base_dir, links);
    }
    std::string node_flow = "incident_link_flow";
    read(doc, "node_flow", node_flow);
    if (node_flow == "incident_link_flow") {
        cfg.node_flow_source = NodeFlowSource::incident_link_flow;
    } else if (node_flow == "mean_demand") {
        cfg.node_flow_source = NodeFlowSource::mean_demand;
    } else if (node_flow == "mean_pressure") {
        cfg.node_flow_source = NodeFlowSource::mean_pressure;
    } else {
        bad_config("node_flow must be incident_link_flow, mean_demand or mean_pressure");
    }
    read(doc, "flow_proxy_pipe_length", cfg.flow_proxy_pipe_length);
    read(doc, "alpha", cfg.alpha);
    read(doc, "alpha_values", cfg.alpha_values);
    if (auto it = doc.find("radio"); it != doc.end()) parse_radio(*it, cfg.radio);
    if (auto it = doc.find("propagation"); it != doc.end()) parse_propagation(*it, cfg.propagation);
    if (auto it = doc.find("energy"); it != doc.end()) parse_energy(*it, cfg.energy);
    if (auto it = doc.find("traffic"); it != doc.end()) parse_traffic(*it, cfg.traffic);
    read(doc, "gateway_counts", cfg.gateway_counts);
    if (auto it = doc.find("strategies"); it != doc.end()) {
        std::vector<std::string> names;
        read(doc, "strategies", names);
        cfg.strategies.clear();
        for (const auto& n : names) {
            auto s = parse_strategy(n);
            if (!s) {
                bad_config("unknown strategy '" + n + "'");
            }
            cfg.strategies.push_back(*s);
        }
    }
    read(doc, "seeds", cfg.seeds);
    read(doc, "horizon_s", cfg.horizon_s);
    read(doc, "battery_sample_interval_s", cfg.battery_sample_interval_s);
    read(doc, "coordinate_scale", cfg.coordinate_scale);
    if (auto it = doc.find("placement"); it != doc.end()) {
        check_keys(*it, "placement",
                   {"max_iterations", "tolerance", "snap_to_node", "coverage_radius_m"});
        read(*it, "max_iterations", cfg.kmeans.max_iterations);
        read(*it, "tolerance", cfg.kmeans.tolerance);
        read(*it, "snap_to_node", cfg.kmeans.snap_to_node);
        read(*it, "coverage_radius_m", cfg.coverage_radius_m);
    }
    std::string out;
    read(doc, "output_dir", out);
    if (!out.empty()) {
        cfg.output_dir = resolve(base_dir, out);
    } else {
        cfg.output_dir = base_dir / "out";
    }
    if (auto it = doc.find("export"); it != doc.end()) {
        check_keys(*it, "export", {"run_files", "transmissions"});
        read(*it, "run_files", cfg.write_run_files);
        read(*it, "transmissions", cfg.write_transmissions);
    }
    read(doc, "threads", cfg.threads);
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        bad_config(path.string() + ": " + e.what());
    }
    return scenario_from_json(doc, path.parent_path());
}

PreparedNetwork prepare_network(const ScenarioConfig& cfg) {
    PreparedNetwork p{load_network(cfg.inp.string()), {}, {}, {}, {}, {}, {}};
    if (cfg.coordinate_scale != 1.0) {
        scale_coordinates(p.net, cfg.coordinate_scale);
    }
    p.warnings = p.net.warnings;
    p.adj = build_adjacency(p.net);
    p.stats = graph_stats(p.adj);
    if (p.stats.components > 1) {
        p.warnings.push_back("network has " + std::to_string(p.stats.components) +
                             " connected components");
    }
    p.centrality = degree_centrality(p.adj);
    if (cfg.hydraulic_nodes) {
        auto series = ingest_hydraulic_csv(cfg.hydraulic_nodes->string(),
                                           cfg.hydraulic_links->string(), p.net);
        p.flow = node_flow(series, p.net.node_count(), cfg.node_flow_source);
    } else {
        auto proxy = flow_proxy(p.net, p.adj, {cfg.flow_proxy_pipe_length});
        p.flow = std::move(proxy.flow);
        p.warnings.insert(p.warnings.end(), proxy.warnings.begin(), proxy.warnings.end());
    }
    p.weights = placement_weights(p.centrality, p.flow, cfg.alpha);
    return p;
}

std::vector<Device> devices_of(const WaterNetwork& net) {
    std::vector<Device> devices;
    devices.reserve(net.node_count());
    for (const auto& n : net.nodes) {
        devices.push_back({n.id, n.position});
    }
    return devices;
}

GatewaySet place_gateways(const PreparedNetwork& prepared, const ScenarioConfig& cfg,
                          std::size_t k, Strategy strategy, std::uint64_t seed,
                          const std::vector<double>& weights) {
    const auto positions = prepared.net.positions();
    switch (strategy) {
    case Strategy::regular_grid: {
        auto set = regular_grid_deploy(k, prepared.net.bbox);
        set.seed = seed;
        return set;
    }
    case Strategy::degree_centrality:
        return degree_centrality_deploy(k, positions, weights, seed, cfg.kmeans);
    case Strategy::max_coverage: {
        auto set = max_coverage_deploy(k, positions, weights, cfg.coverage_radius_m);
        set.seed = seed;
        return set;
    }
    }
    throw Error(ErrorCode::InvalidConfig, "unknown strategy");
}

RunArtifacts run_once(const PreparedNetwork& prepared, const ScenarioConfig& cfg, std::size_t k,
                      Strategy strategy, std::uint64_t seed, const std::vector<double>& weights) {
    try {
        RunArtifacts run;
        run.gateways = place_gateways(prepared, cfg, k, strategy, seed, weights);
        SimulationInput input;
        input.devices = devices_of(prepared.net);
        input.gateways = run.gateways.positions;
        input.radio = cfg.radio;
        input.propagation = cfg.propagation;
        input.energy = cfg.energy;
        input.traffic = cfg.traffic;
        input.horizon_s = cfg.horizon_s;
        input.seed = seed;
        input.battery_sample_interval_s = cfg.battery_sample_interval_s;
        run.result = simulate(input);
        return run;
    } catch (const Error& e) {
        throw Error(e.code(), "(K=" + std::to_string(k) + ", strategy=" +
                                  std::string(to_string(strategy)) + ", seed=" +
                                  std::to_string(seed) + ") " + e.what());
    }
}

RunSummary summarize(const RunArtifacts& run, std::size_t k, Strategy strategy,
                     std::uint64_t seed, double alpha) {
    const auto& f = run.result.features;
    return {k, strategy, seed, alpha, run.result.energy.total_j, f.pdr_total, f.mean_sf, f.sent,
            f.delivered};
}

ComparisonTable compare(const std::vector<RunSummary>& runs) {
    std::map<std::pair<std::size_t, std::string>, std::vector<const RunSummary*>> groups;
    for (const auto& r : runs) {
        groups[{r.k, std::string(to_string(r.strategy))}].push_back(&r);
    }
    ComparisonTable table;
    for (const auto& [key, members] : groups) {
        ComparisonRow row;
        row.k = key.first;
        row.strategy = members.front()->strategy;
        const auto n = static_cast<double>(members.size());
        for (const auto* m : members) {
            row.energy_j_mean += m->energy_j;
            row.pdr += m->pdr;
            row.mean_sf += m->mean_sf;
        }
        row.energy_j_mean /= n;
        row.pdr /= n;
        row.mean_sf /= n;
        if (members.size() > 1) {
            double ss = 0.0;
            for (const auto* m : members) {
                ss += (m->energy_j - row.energy_j_mean) * (m->energy_j - row.energy_j_mean);
            }
            row.energy_j_std = std::sqrt(ss / (n - 1.0));
        }
        table.rows.push_back(row);
    }
    return table;
}

namespace {

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    }
    fn(out);
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
    }
}

std::string run_dir_name(std::size_t k, Strategy s, std::uint64_t seed) {
    return "k" + std::to_string(k) + "_" + std::string(to_string(s)) + "_seed" + std::to_string(seed);
}

// Runs jobs on up to `threads` workers; results land in job order.
template <typename Job>
void parallel_for(std::size_t count, std::size_t threads, Job&& job) {
    if (threads == 0) {
        threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            job(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        for (std::size_t t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        job(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                        next = count;
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const PreparedNetwork prepared = prepare_network(cfg);
    const auto root = cfg.output_dir / cfg.name;
    std::filesystem::create_directories(root);

    write_file(root / "network.json",
               [&](std::ostream& o) { o << network_summary_json(prepared.net) << '\n'; });
    write_file(root / "centrality.csv",
               [&](std::ostream& o) { write_centrality_csv(o, prepared.adj, prepared.centrality); });
    write_file(root / "weights.csv", [&](std::ostream& o) {
        csv::write_row(o, {"node_id", "centrality", "flow", "normalized_flow", "weight"});
        for (std::size_t i = 0; i < prepared.net.node_count(); ++i) {
            csv::write_row(o, {prepared.net.nodes[i].id,
                               csv::format_number(prepared.centrality.centrality[i]),
                               csv::format_number(prepared.flow[i]),
                               csv::format_number(prepared.weights.normalized_flow[i]),
                               csv::format_number(prepared.weights.weight[i])});
        }
    });

    struct Job {
        std::size_t k;
        Strategy strategy;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (auto k : cfg.gateway_counts) {
        for (auto s : cfg.strategies) {
            for (auto seed : cfg.seeds) {
                jobs.push_back({k, s, seed});
            }
        }
    }

    const auto devices = devices_of(prepared.net);
    std::vector<RunSummary> summaries(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        auto run = run_once(prepared, cfg, job.k, job.strategy, job.seed, prepared.weights.weight);
        summaries[i] = summarize(run, job.k, job.strategy, job.seed, cfg.alpha);
        if (cfg.write_run_files) {
            const auto dir = root / "runs" / run_dir_name(job.k, job.strategy, job.seed);
            std::filesystem::create_directories(dir);
            write_file(dir / "gateways.csv",
                       [&](std::ostream& o) { write_gateways_csv(o, run.gateways); });
            export_wireless_csv(tabulate(run.result, devices), dir, cfg.write_transmissions);
        }
    });

    ScenarioResult result;
    result.runs = std::move(summaries);
    result.table = compare(result.runs);
    result.output_dir = root;
    result.warnings = prepared.warnings;

    write_file(root / "runs.csv", [&](std::ostream& o) {
        csv::write_row(o, {"k", "strategy", "seed", "energy_j", "pdr", "mean_sf", "sent", "delivered"});
        for (const auto& r : result.runs) {
            csv::write_row(o, {std::to_string(r.k), std::string(to_string(r.strategy)),
                               std::to_string(r.seed), csv::format_number(r.energy_j),
                               csv::format_number(r.pdr), csv::format_number(r.mean_sf),
                               std::to_string(r.sent), std::to_string(r.delivered)});
        }
    });
    write_file(root / "comparison.csv",
               [&](std::ostream& o) { write_comparison_csv(o, result.table); });
    write_file(root / "comparison.txt",
               [&](std::ostream& o) { o << comparison_text(result.table); });
    return result;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
    csv::write_row(out, {"k", "strategy", "energy_j_mean", "energy_j_std", "pdr", "mean_sf"});
    for (const auto& r : table.rows) {
        csv::write_row(out, {std::to_string(r.k), std::string(to_string(r.strategy)),
                             csv::format_number(r.energy_j_mean), csv::format_number(r.energy_j_std),
                             csv::format_number(r.pdr), csv::format_number(r.mean_sf)});
    }
}

ComparisonTable read_comparison_csv(std::istream& in) {
    auto t = csv::read_table(in, "comparison csv");
    const std::vector<std::string> header = {"k", "strategy", "energy_j_mean", "energy_j_std", "pdr",
                                             "mean_sf"};
    if (t.header != header) {
        throw Error(ErrorCode::SchemaMismatch, "comparison csv: unexpected header");
    }
    ComparisonTable table;
    for (const auto& f : t.rows) {
        auto k = csv::parse_integer(f[0]);
        auto s = parse_strategy(f[1]);
        auto e = csv::parse_number(f[2]);
        auto sd = csv::parse_number(f[3]);
        auto pdr = csv::parse_number(f[4]);
        auto sf = csv::parse_number(f[5]);
        if (!k || *k <= 0 || !s || !e || !sd || !pdr || !sf) {
            throw Error(ErrorCode::SchemaMismatch, "comparison csv: malformed row");
        }
        table.rows.push_back({static_cast<std::size_t>(*k), *s, *e, *sd, *pdr, *sf});
    }
    return table;
}

std::string comparison_text(const ComparisonTable& table) {
    std::vector<Strategy> strategies;
    std::vector<std::size_t> ks;
    for (const auto& r : table.rows) {
        if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) {
            strategies.push_back(r.strategy);
        }
        if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) {
            ks.push_back(r.k);
        }
    }
    std::sort(strategies.begin(), strategies.end());  // enum order: grid first
    const bool paired = std::find(strategies.begin(), strategies.end(), Strategy::regular_grid) !=
                            strategies.end() &&
                        std::find(strategies.begin(), strategies.end(),
                                  Strategy::degree_centrality) != strategies.end();

    std::ostringstream out;
    out << std::setw(6) << "GWs";
    for (auto s : strategies) {
        out << " | " << std::setw(24) << (std::string(to_string(s)) + " [J]");
    }
    if (paired) {
        out << " | " << std::setw(9) << "reduction";
    }
    out << '\n';
    for (auto k : ks) {
        out << std::setw(6) << k;
        double grid = 0.0, centrality = 0.0;
        for (auto s : strategies) {
            auto it = std::find_if(table.rows.begin(), table.rows.end(),
                                   [&](const ComparisonRow& r) { return r.k == k && r.strategy == s; });
            out << " | " << std::setw(24);
            if (it == table.rows.end()) {
                out << "-";
                continue;
            }
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(1) << it->energy_j_mean;
            out << cell.str();
            if (s == Strategy::regular_grid) grid = it->energy_j_mean;
            if (s == Strategy::degree_centrality) centrality = it->energy_j_mean;
        }
        if (paired) {
            std::ostringstream cell;
            if (grid > 0.0) {
                cell << std::fixed << std::setprecision(1) << 100.0 * (grid - centrality) / grid << "%";
            } else {
                cell << "-";
            }
            out << " | " << std::setw(9) << cell.str();
        }
        out << '\n';
    }
    return out.str();
}

KpiPredicate KpiPredicate::parse(const std::string& text) {
    KpiPredicate p;
    p.text_ = text;
    std::string rest = text;
    // split on "&&" or " and "
    std::vector<std::string> parts;
    for (;;) {
        auto amp = rest.find("&&");
        auto word = rest.find(" and ");
        auto cut = std::min(amp, word);
        if (cut == std::string::npos) {
            parts.push_back(rest);
            break;
        }
        parts.push_back(rest.substr(0, cut));
        rest = rest.substr(cut + (cut == amp ? 2 : 5));
    }
    static const std::set<std::string> metrics = {"pdr", "energy", "energy_j", "energy_std", "mean_sf"};
    for (auto part : parts) {
        part.erase(std::remove_if(part.begin(), part.end(), [](unsigned char c) { return std::isspace(c); }),
                   part.end());
        auto op_pos = part.find_first_of("<>=!");
        if (op_pos == std::string::npos || op_pos == 0) {
            throw Error(ErrorCode::InvalidPredicate, "cannot parse clause '" + part + "'");
        }
        Clause c;
        c.metric = part.substr(0, op_pos);
        auto op_end = part.find_first_not_of("<>=!", op_pos);
        c.op = part.substr(op_pos, op_end == std::string::npos ? std::string::npos : op_end - op_pos);
        if (!metrics.contains(c.metric)) {
            throw Error(ErrorCode::InvalidPredicate, "unknown metric '" + c.metric + "'");
        }
        if (c.op != ">=" && c.op != "<=" && c.op != ">" && c.op != "<" && c.op != "==" &&
            c.op != "!=") {
            throw Error(ErrorCode::InvalidPredicate, "unknown operator '" + c.op + "'");
        }
        auto v = op_end == std::string::npos ? std::nullopt : csv::parse_number(part.substr(op_end));
        if (!v) {
            throw Error(ErrorCode::InvalidPredicate, "missing number in '" + part + "'");
        }
        c.value = *v;
        p.clauses_.push_back(c);
    }
    return p;
}

bool KpiPredicate::operator()(const ComparisonRow& row) const {
    for (const auto& c : clauses_) {
        double x = 0.0;
        if (c.metric == "pdr") x = row.pdr;
        else if (c.metric == "energy" || c.metric == "energy_j") x = row.energy_j_mean;
        else if (c.metric == "energy_std") x = row.energy_j_std;
        else x = row.mean_sf;
        bool ok = false;
        if (c.op == ">=") ok = x >= c.value;
        else if (c.op == "<=") ok = x <= c.value;
        else if (c.op == ">") ok = x > c.value;
        else if (c.op == "<") ok = x < c.value;
        else if (c.op == "==") ok = x == c.value;
        else ok = x != c.value;
        if (!ok) {
            return false;
        }
    }
    return true;
}

std::vector<KpiResult> kpi_search(const ScenarioConfig& cfg, const KpiPredicate& predicate,
                                  SweepAxis axis) {
    cfg.validate();
    std::vector<double> values;
    if (axis == SweepAxis::k) {
        for (auto k : cfg.gateway_counts) {
            values.push_back(static_cast<double>(k));
        }
    } else {
        values = cfg.alpha_values;
        std::sort(values.begin(), values.end());
    }
    if (values.empty()) {
        throw Error(ErrorCode::EmptySweep, "sweep axis has no values");
    }

    const PreparedNetwork prepared = prepare_network(cfg);
    std::vector<KpiResult> results;
    for (auto strategy : cfg.strategies) {
        KpiResult res;
        res.strategy = strategy;
        for (double v : values) {
            const std::size_t k = axis == SweepAxis::k ? static_cast<std::size_t>(v) : cfg.gateway_counts.front();
            const double alpha = axis == SweepAxis::alpha ? v : cfg.alpha;
            std::vector<double> weights = prepared.weights.weight;
            if (axis == SweepAxis::alpha) {
                auto cv = prepared.centrality;
                weights = placement_weights(cv, prepared.flow, alpha).weight;
            }
            std::vector<RunSummary> runs(cfg.seeds.size());
            parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t i) {
                auto run = run_once(prepared, cfg, k, strategy, cfg.seeds[i], weights);
                runs[i] = summarize(run, k, strategy, cfg.seeds[i], alpha);
            });
            auto row = compare(runs).rows.front();
            const bool ok = predicate(row);
            res.evaluated.push_back({v, row, ok});
            if (ok) {
                res.best = v;
                break;
            }
        }
        results.push_back(std::move(res));
    }
    return results;
}

json to_json(const std::vector<KpiResult>& results, SweepAxis axis) {
    json out = json::array();
    for (const auto& r : results) {
        json entry;
        entry["strategy"] = to_string(r.strategy);
        entry["axis"] = axis == SweepAxis::k ? "k" : "alpha";
        entry["satisfiable"] = r.best.has_value();
        entry["best"] = r.best ? json(*r.best) : json(nullptr);
        json points = json::array();
        for (const auto& p : r.evaluated) {
            points.push_back({{"value", p.axis_value},
                              {"energy_j_mean", p.row.energy_j_mean},
                              {"pdr", p.row.pdr},
                              {"mean_sf", p.row.mean_sf},
                              {"satisfied", p.satisfied}});
        }
        entry["evaluated"] = std::move(points);
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace swifeed
