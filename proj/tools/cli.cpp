#include "cli.hpp"

#include "swifeed/csv.hpp"
#include "swifeed/error.hpp"
#include "swifeed/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace swifeed::cli {

namespace {

struct Options {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> config;

    std::string inp;
    std::optional<std::string> csv_path;
    bool csv_flag = false;
    std::vector<std::string> hydraulic;
    std::optional<double> alpha;
    std::size_t k = 0;
    std::string strategy;
    std::string predicate;
    std::string axis = "k";
};

// Base scenario: --config when given, defaults otherwise; positional inp,
// --seed and --out override it.
ScenarioConfig scenario_for(const Options& o) {
    ScenarioConfig cfg;
    if (o.config) {
        cfg = load_scenario(*o.config);
    }
    if (!o.inp.empty()) {
        cfg.inp = o.inp;
    }
    if (o.seed) {
        cfg.seeds = {*o.seed};
    }
    if (o.out) {
        cfg.output_dir = *o.out;
    }
    if (o.alpha) {
        cfg.alpha = *o.alpha;
    }
    if (o.hydraulic.size() == 2) {
        cfg.hydraulic_nodes = o.hydraulic[0];
        cfg.hydraulic_links = o.hydraulic[1];
    }
    if (cfg.inp.empty()) {
        throw CLI::ValidationError("an INP path (positional or via --config) is required");
    }
    return cfg;
}

template <typename Fn>
void emit(const std::optional<std::string>& path, std::ostream& fallback, Fn&& fn) {
    if (path && !path->empty() && *path != "-") {
        std::ofstream file(*path, std::ios::binary);
        if (!file) {
            throw Error(ErrorCode::Io, "cannot write '" + *path + "'");
        }
        fn(file);
    } else {
        fn(fallback);
    }
}

void cmd_parse(const Options& o, std::ostream& out) {
    auto cfg = scenario_for(o);
    auto net = load_network(cfg.inp.string());
    out << network_summary_json(net) << '\n';
}

void cmd_graph(const Options& o, std::ostream& out) {
    auto cfg = scenario_for(o);
    auto net = load_network(cfg.inp.string());
    auto adj = build_adjacency(net);
    auto cv = degree_centrality(adj);
    if (o.csv_flag) {
        emit(o.csv_path, out, [&](std::ostream& s) { write_centrality_csv(s, adj, cv); });
        return;
    }
    auto st = graph_stats(adj);
    nlohmann::ordered_json j;
    j["nodes"] = st.nodes;
    j["edges"] = st.edges;
    j["min_degree"] = st.min_degree;
    j["max_degree"] = st.max_degree;
    j["mean_degree"] = st.mean_degree;
    j["components"] = st.components;
    out << j.dump(2) << '\n';
}

void cmd_weights(const Options& o, std::ostream& out, std::ostream& err) {
    auto cfg = scenario_for(o);
    auto prepared = prepare_network(cfg);
    for (const auto& w : prepared.warnings) {
        err << "warning: " << w << '\n';
    }
    emit(o.out, out, [&](std::ostream& s) {
        csv::write_row(s, {"node_id", "centrality", "flow", "normalized_flow", "weight"});
        for (std::size_t i = 0; i < prepared.net.node_count(); ++i) {
            csv::write_row(s, {prepared.net.nodes[i].id,
                               csv::format_number(prepared.centrality.centrality[i]),
                               csv::format_number(prepared.flow[i]),
                               csv::format_number(prepared.weights.normalized_flow[i]),
                               csv::format_number(prepared.weights.weight[i])});
        }
    });
}

void cmd_place(const Options& o, std::ostream& out) {
    auto cfg = scenario_for(o);
    auto strategy = parse_strategy(o.strategy);
    if (!strategy) {
        throw CLI::ValidationError("--strategy must be grid, centrality or coverage");
    }
    auto prepared = prepare_network(cfg);
    auto set = place_gateways(prepared, cfg, o.k, *strategy, o.seed.value_or(cfg.seeds.front()),
                              prepared.weights.weight);
    set.alpha = cfg.alpha;
    emit(o.out, out, [&](std::ostream& s) { write_gateways_csv(s, set); });
}

void cmd_simulate(const Options& o, std::ostream& out) {
    auto cfg = scenario_for(o);
    cfg.gateway_counts = {cfg.gateway_counts.front()};
    cfg.strategies = {cfg.strategies.front()};
    cfg.seeds = {cfg.seeds.front()};
    auto result = run_scenario(cfg);
    const auto& r = result.runs.front();
    nlohmann::ordered_json j;
    j["k"] = r.k;
    j["strategy"] = to_string(r.strategy);
    j["seed"] = r.seed;
    j["energy_j"] = r.energy_j;
    j["sent"] = r.sent;
    j["delivered"] = r.delivered;
    j["pdr"] = r.pdr;
    j["mean_sf"] = r.mean_sf;
    j["output_dir"] = result.output_dir.string();
    out << j.dump(2) << '\n';
}

void cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    auto result = run_scenario(scenario_for(o));
    for (const auto& w : result.warnings) {
        err << "warning: " << w << '\n';
    }
    out << comparison_text(result.table);
    out << "outputs: " << result.output_dir.string() << '\n';
}

void cmd_kpi(const Options& o, std::ostream& out) {
    auto cfg = scenario_for(o);
    if (o.axis != "k" && o.axis != "alpha") {
        throw CLI::ValidationError("--axis must be k or alpha");
    }
    const auto axis = o.axis == "k" ? SweepAxis::k : SweepAxis::alpha;
    auto results = kpi_search(cfg, KpiPredicate::parse(o.predicate), axis);
    out << to_json(results, axis).dump(2) << '\n';
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Water-network driven LoRaWAN deployment and energy evaluation", "swifeed"};
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("--seed", o.seed, "Override the scenario seed list with a single seed");
    app.add_option("--out", o.out, "Output directory (or output file for parse-style commands)");
    app.add_option("--config", o.config, "Scenario JSON file")->check(CLI::ExistingFile);

    auto* parse = app.add_subcommand("parse", "Parse an INP file and print a JSON summary");
    parse->add_option("inp", o.inp, "EPANET INP file")->check(CLI::ExistingFile);

    auto* graph = app.add_subcommand("graph", "Degree and centrality of every node");
    graph->add_option("inp", o.inp, "EPANET INP file")->check(CLI::ExistingFile);
    graph->add_option("--csv", o.csv_path, "Write node_id,degree,centrality CSV (to stdout if no path)")
        ->expected(0, 1);

    auto* weights = app.add_subcommand("weights", "Placement weights from centrality and flow");
    weights->add_option("inp", o.inp, "EPANET INP file")->check(CLI::ExistingFile);
    weights->add_option("--hydraulic", o.hydraulic, "Node and link hydraulic CSV files")
        ->expected(2)
        ->check(CLI::ExistingFile);
    weights->add_option("--alpha", o.alpha, "Centrality share of the weight blend")
        ->check(CLI::Range(0.0, 1.0));

    auto* place = app.add_subcommand("place", "Compute gateway positions");
    place->add_option("inp", o.inp, "EPANET INP file")->check(CLI::ExistingFile);
    place->add_option("--k", o.k, "Number of gateways")->required()->check(CLI::PositiveNumber);
    place->add_option("--strategy", o.strategy, "grid | centrality | coverage")->required();
    place->add_option("--alpha", o.alpha, "Centrality share of the weight blend")
        ->check(CLI::Range(0.0, 1.0));

    auto* simulate = app.add_subcommand("simulate", "Run a single scenario point");
    auto* sweep = app.add_subcommand("sweep", "Run the full gateway-count sweep");
    auto* kpi = app.add_subcommand("kpi", "Smallest sweep value meeting a KPI predicate");
    kpi->add_option("--predicate", o.predicate, "e.g. \"pdr>=0.9 && energy<=2e5\"")->required();
    kpi->add_option("--axis", o.axis, "k | alpha");

    for (auto* sub : {simulate, sweep, kpi}) {
        sub->add_option("--config", o.config, "Scenario JSON file")
            ->check(CLI::ExistingFile)
            ->required();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);  // --help
            return 0;
        }
        err << "error: Usage: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*parse) cmd_parse(o, out);
        else if (*graph) { o.csv_flag = graph->count("--csv") > 0; cmd_graph(o, out); }
        else if (*weights) cmd_weights(o, out, err);
        else if (*place) cmd_place(o, out);
        else if (*simulate) cmd_simulate(o, out);
        else if (*sweep) cmd_sweep(o, out, err);
        else if (*kpi) cmd_kpi(o, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: Usage: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.category() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: Internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace swifeed::cli
