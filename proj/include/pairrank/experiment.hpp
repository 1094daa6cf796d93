#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pairrank/baselines.hpp"
#include "pairrank/btl.hpp"
#include "pairrank/errors.hpp"
#include "pairrank/graph.hpp"
#include "pairrank/io.hpp"
#include "pairrank/metrics.hpp"
#include "pairrank/solver.hpp"

namespace pairrank {

enum class Estimator { RK, RC, MLE };

inline std::string estimator_name(Estimator e) {
    switch (e) {
        case Estimator::RK: return "RK";
        case Estimator::RC: return "RC";
        case Estimator::MLE: return "MLE";
    }
    return "?";
}

/// Comma-separated list, e.g. "rk,rc,mle" (case-insensitive).
inline std::vector<Estimator> parse_estimators(const std::string& spec) {
    std::vector<Estimator> out;
    std::string token;
    std::stringstream ss(spec);
    while (std::getline(ss, token, ',')) {
        std::string t;
        for (char c : token)
            if (!std::isspace(static_cast<unsigned char>(c)))
                t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (t == "rk") out.push_back(Estimator::RK);
        else if (t == "rc") out.push_back(Estimator::RC);
        else if (t == "mle") out.push_back(Estimator::MLE);
        else if (!t.empty()) throw parameter_error("unknown estimator `" + t + "` (use rk, rc, mle)");
    }
    if (out.empty()) throw parameter_error("no estimators given");
    return out;
}

/// Fixed-format double, deterministic across runs (shortest round-trip form).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

/// Runs fn(0..count-1) on a bounded pool. Worker assignment never influences
/// results; the first exception is rethrown on the caller.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr error;
    auto body = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline int max_degree_node(const ComparisonGraph& g) {
    int best = 0;
    for (int i = 1; i < g.node_count(); ++i)
        if (g.degree(i) > g.degree(best)) best = i;
    return best;
}

} // namespace detail

struct ExperimentConfig {
    int n = 400;
    double p = 0.16;
    std::string graph_file; // explicit graph instead of Erdos-Renyi draws
    int k = 100;
    double epsilon = 0.0;
    double lambda = 0.0;
    std::vector<Estimator> estimators = {Estimator::RK};
    StoppingRule stop = StoppingRule::rel_weight_change();
    long long max_iters = 200000;
    bool warm_start = false;
    int trials = 1;
    std::uint64_t seed = 1;
    int threads = 0; // 0 = hardware concurrency
    std::string out; // output base path; empty = stdout

    void validate() const {
        if (graph_file.empty()) {
            if (n < 2) throw parameter_error("config: need n >= 2");
            if (!(p > 0.0) || p > 1.0) throw parameter_error("config: need 0 < p <= 1");
        }
        if (k < 1) throw parameter_error("config: need k >= 1");
        if (epsilon < 0.0) throw parameter_error("config: epsilon must be >= 0");
        if (lambda < 0.0) throw parameter_error("config: lambda must be >= 0");
        if (trials < 1) throw parameter_error("config: need trials >= 1");
        if (max_iters < 1) throw parameter_error("config: need max-iters >= 1");
    }
};

struct TrialRow {
    int trial = 0;
    Estimator estimator = Estimator::RK;
    std::uint64_t trial_seed = 0;
    int m_edges = 0;
    int redraws = 0;
    long long iterations = -1;     // RK only; -1 elsewhere
    std::string stop_rule;         // RK only
    double norm_weight_error = 0.0;
    double dw = 0.0;
    double wall_ms = 0.0;          // diagnostics only, never emitted to files
};

struct MetricSummary {
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct EstimatorSummary {
    MetricSummary norm_weight_error;
    MetricSummary dw;
    MetricSummary iterations; // RK only (0 otherwise)
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TrialRow> rows;
    std::map<std::string, EstimatorSummary> summary; // keyed by estimator name
    int total_redraws = 0;
    double wall_seconds = 0.0;
};

namespace detail {

inline MetricSummary summarize(const std::vector<double>& v) {
    MetricSummary s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double var = 0.0;
        for (double x : v) var += (x - s.mean) * (x - s.mean);
        var /= static_cast<double>(v.size() - 1);
        s.stderr_ = std::sqrt(var / static_cast<double>(v.size()));
    }
    return s;
}

/// Draws G(n, p) graphs until one is connected. Aborts after 100 consecutive
/// rejections, which signals p far below the connectivity threshold.
inline ComparisonGraph connected_erdos_renyi(int n, double p, std::uint64_t seed, int& redraws) {
    redraws = 0;
    for (int attempt = 0; attempt <= 100; ++attempt) {
        ComparisonGraph g = erdos_renyi(n, p, derive_seed(seed, 0xa77e3f7ULL + attempt));
        if (is_connected(g)) return g;
        ++redraws;
    }
    throw numeric_error("simulate: 100 consecutive disconnected Erdos-Renyi draws at n=" +
                        std::to_string(n) + ", p=" + format_double(p) +
                        "; raise p toward or above log(n)/n, or supply a connected --graph-file");
}

} // namespace detail

/// Estimates item weights from tallies with one named estimator. RK solves
/// the Laplacian system by randomized Kaczmarz and reports iteration count.
inline WeightVector run_estimator(Estimator est, const ComparisonGraph& g,
                                  const EdgeObservations& obs, const ExperimentConfig& cfg,
                                  const WeightVector* truth, std::uint64_t solver_seed,
                                  long long* iterations_out = nullptr,
                                  std::string* stop_rule_out = nullptr) {
    switch (est) {
        case Estimator::RK: {
            const LinearSystem sys = build_system(g, obs, cfg.epsilon);
            std::vector<double> init(g.node_count(), 0.0);
            if (cfg.warm_start)
                init = warm_start(g, obs, detail::max_degree_node(g), cfg.epsilon);
            SolveOptions opt;
            opt.stop = cfg.stop;
            opt.max_iters = cfg.max_iters;
            opt.seed = solver_seed;
            opt.ground_truth = truth;
            const SolveReport rep = solve(sys, std::move(init), opt);
            if (iterations_out) *iterations_out = rep.iterations;
            if (stop_rule_out) *stop_rule_out = rep.stopped ? rep.stop_rule : "max_iters";
            return weights_from_iterate(rep.x);
        }
        case Estimator::RC:
            return rank_centrality(g, obs, cfg.epsilon);
        case Estimator::MLE:
            return regularized_mle(g, obs, cfg.lambda);
    }
    throw parameter_error("unknown estimator");
}

/// Synthetic experiment: per trial, draw a connected comparison graph,
/// simulate k comparisons per edge from the w_i = 10^{i/n} ground truth, run
/// every configured estimator and score it. Trials execute on a worker pool;
/// per-trial seeds derive from (master seed, trial index) only, so output is
/// schedule-independent.
inline ExperimentResult run_simulate(const ExperimentConfig& cfg,
                                     const std::function<void(const std::string&)>& warn = {}) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentResult result;
    result.config = cfg;

    ComparisonGraph fixed_graph;
    bool have_fixed_graph = false;
    if (!cfg.graph_file.empty()) {
        fixed_graph = read_edge_list_file(cfg.graph_file);
        have_fixed_graph = true;
        if (!is_connected(fixed_graph) && warn)
            warn("graph file is not connected; per-component gauge applies");
    }

    const int n_items = have_fixed_graph ? fixed_graph.node_count() : cfg.n;
    const WeightVector truth = experiment_weights(n_items);
    const int per_trial = static_cast<int>(cfg.estimators.size());
    result.rows.assign(static_cast<std::size_t>(cfg.trials) * per_trial, {});
    std::vector<int> redraws(cfg.trials, 0);

    detail::parallel_for(cfg.trials, cfg.threads, [&](int trial) {
        const std::uint64_t trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
        ComparisonGraph local;
        const ComparisonGraph* g = &fixed_graph;
        if (!have_fixed_graph) {
            local = detail::connected_erdos_renyi(cfg.n, cfg.p, trial_seed, redraws[trial]);
            g = &local;
        }
        const EdgeObservations obs =
            simulate_comparisons(*g, truth, cfg.k, derive_seed(trial_seed, 1));
        for (int e = 0; e < per_trial; ++e) {
            const auto tstart = std::chrono::steady_clock::now();
            TrialRow row;
            row.trial = trial;
            row.estimator = cfg.estimators[e];
            row.trial_seed = trial_seed;
            row.m_edges = g->edge_count();
            row.redraws = redraws[trial];
            const WeightVector w_est =
                run_estimator(row.estimator, *g, obs, cfg, &truth, derive_seed(trial_seed, 2),
                              &row.iterations, &row.stop_rule);
            row.norm_weight_error = normalized_weight_error(truth, w_est);
            row.dw = d_w(truth, ordering_from_weights(w_est));
            if (row.dw > row.norm_weight_error + 1e-12)
                throw numeric_error("invariant violated: d_w > normalized weight error on trial " +
                                    std::to_string(trial));
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                    tstart)
                              .count();
            result.rows[static_cast<std::size_t>(trial) * per_trial + e] = std::move(row);
        }
    });

    for (int r : redraws) result.total_redraws += r;
    for (Estimator est : cfg.estimators) {
        std::vector<double> nwe, dw, iters;
        for (const TrialRow& row : result.rows) {
            if (row.estimator != est) continue;
            nwe.push_back(row.norm_weight_error);
            dw.push_back(row.dw);
            if (row.iterations >= 0) iters.push_back(static_cast<double>(row.iterations));
        }
        EstimatorSummary s;
        s.norm_weight_error = detail::summarize(nwe);
        s.dw = detail::summarize(dw);
        s.iterations = detail::summarize(iters);
        result.summary[estimator_name(est)] = s;
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

/// CSV table of per-trial rows followed by mean/stderr summary rows. Columns
/// are documented in docs/FORMATS.md. Contains no timing, so identical config
/// + seed reproduces the bytes exactly.
inline std::string simulate_csv(const ExperimentResult& r) {
    std::string out;
    out += "# pairrank simulate\n";
    out += "# n=" + std::to_string(r.config.n) + " p=" + format_double(r.config.p) +
           " k=" + std::to_string(r.config.k) + " epsilon=" + format_double(r.config.epsilon) +
           " lambda=" + format_double(r.config.lambda) + " seed=" + std::to_string(r.config.seed) +
           " trials=" + std::to_string(r.config.trials) + " stop=" + r.config.stop.name() +
           " stop_window=" + std::to_string(r.config.stop.window) +
           " stop_tol=" + format_double(r.config.stop.tol) +
           " max_iters=" + std::to_string(r.config.max_iters) +
           " warm_start=" + std::to_string(r.config.warm_start ? 1 : 0) +
           (r.config.graph_file.empty() ? "" : " graph_file=" + r.config.graph_file) + "\n";
    out += "trial,estimator,m_edges,redraws,trial_seed,iterations,stop_rule,norm_weight_error,d_w\n";
    for (const TrialRow& row : r.rows) {
        out += std::to_string(row.trial) + "," + estimator_name(row.estimator) + "," +
               std::to_string(row.m_edges) + "," + std::to_string(row.redraws) + "," +
               std::to_string(row.trial_seed) + "," +
               (row.iterations >= 0 ? std::to_string(row.iterations) : "") + "," + row.stop_rule +
               "," + format_double(row.norm_weight_error) + "," + format_double(row.dw) + "\n";
    }
    for (const auto& [name, s] : r.summary) {
        out += "mean," + name + ",,,," +
               (s.iterations.mean > 0 ? format_double(s.iterations.mean) : "") + ",," +
               format_double(s.norm_weight_error.mean) + "," + format_double(s.dw.mean) + "\n";
        out += "stderr," + name + ",,,," +
               (s.iterations.mean > 0 ? format_double(s.iterations.stderr_) : "") + ",," +
               format_double(s.norm_weight_error.stderr_) + "," + format_double(s.dw.stderr_) + "\n";
    }
    return out;
}

inline nlohmann::json simulate_summary_json(const ExperimentResult& r) {
    nlohmann::json cfg{
        {"n", r.config.n},
        {"p", r.config.p},
        {"k", r.config.k},
        {"epsilon", r.config.epsilon},
        {"lambda", r.config.lambda},
        {"seed", r.config.seed},
        {"trials", r.config.trials},
        {"stop", r.config.stop.name()},
        {"stop_window", r.config.stop.window},
        {"stop_tol", r.config.stop.tol},
        {"max_iters", r.config.max_iters},
        {"warm_start", r.config.warm_start},
    };
    if (!r.config.graph_file.empty()) cfg["graph_file"] = r.config.graph_file;
    std::vector<std::string> est_names;
    for (Estimator e : r.config.estimators) est_names.push_back(estimator_name(e));
    cfg["estimators"] = est_names;

    nlohmann::json per;
    for (const auto& [name, s] : r.summary) {
        per[name] = {
            {"norm_weight_error", {{"mean", s.norm_weight_error.mean}, {"stderr", s.norm_weight_error.stderr_}}},
            {"d_w", {{"mean", s.dw.mean}, {"stderr", s.dw.stderr_}}},
        };
        if (s.iterations.mean > 0)
            per[name]["iterations"] = {{"mean", s.iterations.mean}, {"stderr", s.iterations.stderr_}};
    }
    return nlohmann::json{{"command", "simulate"},
                          {"config", cfg},
                          {"total_redraws", r.total_redraws},
                          {"estimators", per}};
}

// ---------------------------------------------------------------------------
// Ranking tables (match-file workflow)

struct RankingRow {
    int rank = 0;
    std::string name;
    int degree = 0;
    double win_ratio = 0.0; // +inf for all-wins items
    double weight = 0.0;
    bool isolated = false;
};

/// Ranks the players of a match dataset with one estimator. Weights are
/// gauge-normalized to geometric mean 1 and sorted non-increasing; isolated
/// items (no comparisons at all) would sink to the bottom, flagged.
inline std::vector<RankingRow> rank_table(const MatchData& data, Estimator est, double epsilon,
                                          double lambda, std::uint64_t seed = 1) {
    ExperimentConfig cfg;
    cfg.epsilon = epsilon;
    cfg.lambda = lambda;
    const WeightVector w =
        run_estimator(est, data.graph, data.observations, cfg, nullptr, seed);
    const int n = data.graph.node_count();
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const bool ia = data.graph.degree(a) == 0, ib = data.graph.degree(b) == 0;
        if (ia != ib) return ib;
        return w[a] > w[b];
    });
    std::vector<RankingRow> rows(n);
    for (int r = 0; r < n; ++r) {
        const int i = order[r];
        RankingRow& row = rows[r];
        row.rank = r + 1;
        row.name = data.names[i];
        row.degree = data.graph.degree(i);
        row.isolated = row.degree == 0;
        row.win_ratio = row.isolated ? 0.0 : win_ratio(data.observations, i);
        row.weight = w[i];
    }
    return rows;
}

inline std::string ranking_csv(const std::vector<RankingRow>& rows) {
    std::string out = "rank,name,degree,win_ratio,weight\n";
    for (const RankingRow& r : rows) {
        out += std::to_string(r.rank) + "," + r.name + "," + std::to_string(r.degree) + "," +
               format_double(r.win_ratio) + "," + format_double(r.weight) +
               (r.isolated ? ",isolated" : "") + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tracking scenario (slowly drifting true weights)

struct TrackConfig {
    int n = 50;
    double p = 0.3;
    std::string graph_file;
    double epsilon = 1.0;
    double drift_sigma = 0.0; // per-event random-walk std of every log-weight
    double step_c = 0.05;
    long long events = 20000;
    std::uint64_t seed = 1;
    TrackingEndpoint endpoint = TrackingEndpoint::SmallerIndex;

    void validate() const {
        if (graph_file.empty() && n < 2) throw parameter_error("track: need n >= 2");
        if (!(step_c >= 0.0) || step_c > 1.0) throw parameter_error("track: need 0 <= c <= 1");
        if (events < 1) throw parameter_error("track: need events >= 1");
        if (drift_sigma < 0.0) throw parameter_error("track: drift sigma must be >= 0");
        if (!(epsilon > 0.0)) throw parameter_error("track: eps > 0 required for streaming tallies");
    }
};

struct TrackResult {
    TrackConfig config;
    std::vector<double> dw_trace; // D_w against the instantaneous truth, per event
    double final_dw = 0.0;
    int m_edges = 0;
};

/// Streams comparison events through the constant-step-size tracking update.
/// Every event: all true log-weights take a random-walk step of drift_sigma,
/// the environment reports the outcome of one uniformly chosen edge, and the
/// tracker folds it in at step size c.
inline TrackResult run_track(const TrackConfig& cfg) {
    cfg.validate();
    TrackResult out;
    out.config = cfg;

    ComparisonGraph g;
    if (!cfg.graph_file.empty()) {
        g = read_edge_list_file(cfg.graph_file);
    } else {
        int redraws = 0;
        g = detail::connected_erdos_renyi(cfg.n, cfg.p, derive_seed(cfg.seed, 0x7acc5ULL), redraws);
    }
    const int n = g.node_count();
    out.m_edges = g.edge_count();

    std::vector<double> v(n); // true log-weights, drifting
    {
        const WeightVector w0 = experiment_weights(n);
        for (int i = 0; i < n; ++i) v[i] = std::log(w0[i]);
    }
    EdgeObservations obs(g);
    LinearSystem sys = build_system(g, obs, cfg.epsilon);
    SolverState state(std::vector<double>(n, 0.0), derive_seed(cfg.seed, 0x57a7eULL));
    auto env_rng = make_rng(derive_seed(cfg.seed, 0xd21f7ULL));

    out.dw_trace.reserve(cfg.events);
    std::vector<double> w_now(n);
    for (long long ev = 0; ev < cfg.events; ++ev) {
        if (cfg.drift_sigma > 0.0)
            for (int i = 0; i < n; ++i) v[i] += cfg.drift_sigma * gaussian(env_rng);
        const int e = static_cast<int>(uniform01(env_rng) * g.edge_count());
        const auto [i, j] = g.edges()[std::min(e, g.edge_count() - 1)];
        const double p_ij = 1.0 / (1.0 + std::exp(v[j] - v[i]));
        const int outcome = bernoulli(env_rng, p_ij) ? 1 : 0;
        tracking_step(sys, state, cfg.step_c, i, j, outcome, obs, cfg.epsilon, cfg.endpoint);

        double vmean = 0.0;
        for (double x : v) vmean += x;
        vmean /= n;
        for (int t = 0; t < n; ++t) w_now[t] = std::exp(v[t] - vmean);
        out.dw_trace.push_back(d_w(WeightVector(w_now), ordering_from_scores(state.x)));
    }
    out.final_dw = out.dw_trace.back();
    return out;
}

inline std::string track_csv(const TrackResult& r) {
    std::string out;
    out += "# pairrank track\n";
    out += "# n=" + std::to_string(r.config.n) + " p=" + format_double(r.config.p) +
           " epsilon=" + format_double(r.config.epsilon) +
           " drift_sigma=" + format_double(r.config.drift_sigma) +
           " c=" + format_double(r.config.step_c) + " events=" + std::to_string(r.config.events) +
           " seed=" + std::to_string(r.config.seed) + " m_edges=" + std::to_string(r.m_edges) + "\n";
    out += "event,d_w\n";
    for (std::size_t i = 0; i < r.dw_trace.size(); ++i)
        out += std::to_string(i + 1) + "," + format_double(r.dw_trace[i]) + "\n";
    return out;
}

} // namespace pairrank
