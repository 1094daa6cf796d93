// Command-line front end: synthetic experiments, match-file ranking, the
// tracking scenario and the Laplacian spectrum utility.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pairrank/experiment.hpp"
#include "pairrank/io.hpp"
#include "pairrank/spectral.hpp"

namespace {

using namespace pairrank;

StoppingRule parse_stop(const std::string& spec, int window, double tol) {
    if (spec == "i1" || spec == "rel-change")
        return StoppingRule::rel_weight_change(window, tol);
    if (spec == "i3" || spec == "dw")
        return StoppingRule::dw_converged(window, tol);
    if (spec.rfind("i4", 0) == 0) {
        int k = 0, m = 0;
        if (std::sscanf(spec.c_str(), "i4:%d:%d", &k, &m) != 2)
            throw parameter_error("--stop i4 needs the form i4:<K>:<M>");
        return StoppingRule::top_k_in_m_rule(k, m);
    }
    throw parameter_error("unknown --stop `" + spec + "` (i1, i3, i4:<K>:<M>)");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write " + path);
    out << content;
}

void add_config_flag(CLI::App* cmd) {
    cmd->set_config("--config", "", "key=value config file; command-line flags override it");
}

int run(int argc, char** argv) {
    CLI::App app{"Rank aggregation from pairwise comparisons (BTL model, randomized Kaczmarz)"};
    app.require_subcommand(1);

    // --- simulate ----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "synthetic Erdos-Renyi experiment");
    ExperimentConfig cfg;
    std::string estimators = "rk";
    std::string stop = "i1";
    int stop_window = 500;
    double stop_tol = 1e-7;
    sim->add_option("--n", cfg.n, "item count");
    sim->add_option("--p", cfg.p, "edge probability");
    sim->add_option("--k", cfg.k, "comparisons per edge");
    sim->add_option("--epsilon", cfg.epsilon, "tally regularization (0 aborts on one-sided tallies)");
    sim->add_option("--lambda", cfg.lambda, "MLE ridge penalty");
    sim->add_option("--estimators", estimators, "comma list of rk,rc,mle");
    sim->add_option("--stop", stop, "stopping rule: i1, i3 or i4:<K>:<M>");
    sim->add_option("--stop-window", stop_window, "stopping window (iterations)");
    sim->add_option("--stop-tol", stop_tol, "stopping tolerance");
    sim->add_option("--max-iters", cfg.max_iters, "iteration guard");
    sim->add_option("--trials", cfg.trials, "independent trials");
    sim->add_option("--seed", cfg.seed, "master seed");
    sim->add_flag("--warm-start", cfg.warm_start, "BFS warm start from the max-degree node");
    sim->add_option("--out", cfg.out, "output base path (writes <out>.csv and <out>.json)");
    sim->add_option("--graph-file", cfg.graph_file, "edge-list file instead of Erdos-Renyi draws");
    sim->add_option("--threads", cfg.threads, "worker pool size (0 = hardware)");
    add_config_flag(sim);
    sim->callback([&]() {
        cfg.estimators = parse_estimators(estimators);
        cfg.stop = parse_stop(stop, stop_window, stop_tol);
        const ExperimentResult res =
            run_simulate(cfg, [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; });
        const std::string csv = simulate_csv(res);
        if (cfg.out.empty()) {
            std::cout << csv;
        } else {
            write_file(cfg.out + ".csv", csv);
            write_file(cfg.out + ".json", simulate_summary_json(res).dump(2) + "\n");
        }
        std::cerr << "simulate: " << cfg.trials << " trial(s), " << res.total_redraws
                  << " redraw(s), " << res.wall_seconds << "s\n";
    });

    // --- rank --------------------------------------------------------------
    auto* rank = app.add_subcommand("rank", "rank players from a head-to-head match file");
    std::string matches, rank_out;
    std::string rank_estimator = "rk";
    double rank_eps = 1.0;
    double rank_lambda = 0.05;
    std::uint64_t rank_seed = 1;
    rank->add_option("--matches", matches, "CSV match file: name_a,name_b,wins_a,wins_b")->required();
    rank->add_option("--epsilon", rank_eps, "tally regularization (needed for one-sided records)");
    rank->add_option("--lambda", rank_lambda, "MLE ridge penalty");
    rank->add_option("--estimators", rank_estimator, "one of rk, rc, mle");
    rank->add_option("--seed", rank_seed, "solver seed (rk)");
    rank->add_option("--out", rank_out, "output CSV path (default stdout)");
    add_config_flag(rank);
    rank->callback([&]() {
        const auto ests = parse_estimators(rank_estimator);
        if (ests.size() != 1) throw parameter_error("rank: give exactly one estimator");
        const MatchData data = build_match_data(
            parse_match_file(matches),
            [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; });
        if (!is_connected(data.graph))
            std::cerr << "warning: comparison graph is not connected; "
                         "weights are only comparable within components\n";
        const auto rows = rank_table(data, ests[0], rank_eps, rank_lambda, rank_seed);
        const std::string csv = ranking_csv(rows);
        if (rank_out.empty())
            std::cout << csv;
        else
            write_file(rank_out, csv);
    });

    // --- track -------------------------------------------------------------
    auto* track = app.add_subcommand("track", "constant-step-size tracking of drifting weights");
    TrackConfig tcfg;
    std::string track_out, endpoint = "smaller";
    track->add_option("--n", tcfg.n, "item count");
    track->add_option("--p", tcfg.p, "edge probability");
    track->add_option("--graph-file", tcfg.graph_file, "edge-list file instead of Erdos-Renyi");
    track->add_option("--epsilon", tcfg.epsilon, "tally regularization");
    track->add_option("--drift-sigma", tcfg.drift_sigma, "per-event log-weight random-walk std");
    track->add_option("--step-c", tcfg.step_c, "constant step size c in (0, 1]");
    track->add_option("--events", tcfg.events, "number of comparison events");
    track->add_option("--seed", tcfg.seed, "master seed");
    track->add_option("--endpoint", endpoint, "update endpoint: smaller, larger or random");
    track->add_option("--out", track_out, "output CSV path (default stdout)");
    add_config_flag(track);
    track->callback([&]() {
        if (endpoint == "smaller") tcfg.endpoint = TrackingEndpoint::SmallerIndex;
        else if (endpoint == "larger") tcfg.endpoint = TrackingEndpoint::LargerIndex;
        else if (endpoint == "random") tcfg.endpoint = TrackingEndpoint::Random;
        else throw parameter_error("--endpoint must be smaller, larger or random");
        const TrackResult res = run_track(tcfg);
        const std::string csv = track_csv(res);
        if (track_out.empty())
            std::cout << csv;
        else
            write_file(track_out, csv);
        std::cerr << "track: " << res.config.events << " events, final D_w " << res.final_dw << "\n";
    });

    // --- spectrum ----------------------------------------------------------
    auto* spec = app.add_subcommand("spectrum", "extreme Laplacian eigenvalues of a graph file");
    std::string graph_file;
    spec->add_option("--graph-file", graph_file, "edge-list file")->required();
    add_config_flag(spec);
    spec->callback([&]() {
        const ComparisonGraph g = read_edge_list_file(graph_file);
        const LaplacianSpectrum s = laplacian_extreme_eigenvalues(g);
        std::cout << "n=" << g.node_count() << "\n"
                  << "m=" << g.edge_count() << "\n"
                  << "connected=" << (s.connected ? 1 : 0) << "\n"
                  << "lambda_min_nonzero=" << format_double(s.lambda_min_nonzero) << "\n"
                  << "lambda_max=" << format_double(s.lambda_max) << "\n";
        if (!s.connected)
            std::cerr << "warning: graph is disconnected; lambda_min_nonzero degenerates to ~0\n";
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
