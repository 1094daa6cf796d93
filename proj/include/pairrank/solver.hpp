#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "pairrank/btl.hpp"
#include "pairrank/errors.hpp"
#include "pairrank/graph.hpp"
#include "pairrank/metrics.hpp"
#include "pairrank/rng.hpp"

namespace pairrank {

/// The normal equations Ly = LL^T v of the logit least-squares problem,
/// held implicitly: adjacency (rows of the Laplacian), right-hand side
/// b_i = sum_{j in N(i)} y_ij, and the node-sampling distribution
/// p_i ~ ||a_i||^2 = deg_i^2 + deg_i. Owns copies of everything it needs, so
/// it stays valid if the source graph goes away. Tracking updates may grow
/// the edge set in place.
class LinearSystem {
public:
    LinearSystem(const ComparisonGraph& g, const EdgeObservations& obs, double eps) {
        n_ = g.node_count();
        adjacency_.assign(n_, {});
        for (int i = 0; i < n_; ++i) adjacency_[i] = g.neighbors(i);
        b_.assign(n_, 0.0);
        for (int e = 0; e < static_cast<int>(g.edges().size()); ++e) {
            const auto [i, j] = g.edges()[e];
            const int oe = obs.find_edge(i, j);
            if (oe < 0)
                throw parameter_error("build_system: graph edge (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ") has no observations");
            double yv;
            try {
                yv = obs.y(oe, eps);
            } catch (const degenerate_estimate_error&) {
                throw degenerate_estimate_error("build_system: edge (" + std::to_string(i) + ", " +
                                                std::to_string(j) + ") has a degenerate estimate");
            }
            if (!std::isfinite(yv))
                throw degenerate_estimate_error("build_system: non-finite y on edge (" +
                                                std::to_string(i) + ", " + std::to_string(j) + ")");
            b_[i] += yv;
            b_[j] -= yv;
        }
        refresh_norms();
        connected_ = is_connected(g);
    }

    int size() const { return n_; }
    bool connected() const { return connected_; }
    const std::vector<double>& rhs() const { return b_; }
    const std::vector<int>& neighbors(int i) const { return adjacency_[i]; }
    int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }
    double row_norm_sq(int i) const { return norm_sq_[i]; }

    /// Sampling probability of node i.
    double sampling_probability(int i) const { return norm_sq_[i] / norm_total_; }

    double residual(int i, std::span<const double> x) const {
        double ax = static_cast<double>(degree(i)) * x[i];
        for (int j : adjacency_[i]) ax -= x[j];
        return b_[i] - ax;
    }

    int sample_node(std::mt19937_64& rng) const { return static_cast<int>(alias_.sample(rng)); }

    /// Tracking support: shifts b after the logit of edge (i, j) moved from
    /// y_old to y_new in the i->j direction.
    void shift_rhs(int i, int j, double y_old, double y_new) {
        b_[i] += y_new - y_old;
        b_[j] -= y_new - y_old;
    }

    /// Tracking support: appends a brand-new edge. Degrees, row norms and the
    /// sampling distribution are refreshed; connectivity is re-evaluated by
    /// the caller if it cares.
    void insert_edge(int i, int j) {
        adjacency_[i].push_back(j);
        adjacency_[j].push_back(i);
        refresh_norms();
    }

private:
    void refresh_norms() {
        norm_sq_.assign(n_, 0.0);
        norm_total_ = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double d = static_cast<double>(adjacency_[i].size());
            norm_sq_[i] = d * d + d;
            norm_total_ += norm_sq_[i];
        }
        if (norm_total_ <= 0.0)
            throw parameter_error("build_system: graph has no edges");
        alias_ = AliasTable(norm_sq_);
    }

    int n_ = 0;
    std::vector<std::vector<int>> adjacency_;
    std::vector<double> b_;
    std::vector<double> norm_sq_;
    double norm_total_ = 0.0;
    bool connected_ = false;
    AliasTable alias_;
};

inline LinearSystem build_system(const ComparisonGraph& g, const EdgeObservations& obs, double eps) {
    return LinearSystem(g, obs, eps);
}

/// Mutable state of one randomized Kaczmarz run: the current log-weight
/// iterate, its own RNG stream and running cost diagnostics. The coordinate
/// sum over each connected component is invariant under every step.
struct SolverState {
    std::vector<double> x;
    long long iteration = 0;
    std::mt19937_64 rng;
    unsigned long long touched_entries = 0; // deg(i)+1 summed over steps

    SolverState(std::vector<double> init, std::uint64_t seed)
        : x(std::move(init)), rng(make_rng(derive_seed(seed, 0x501feULL))) {}
};

/// One projection step: draw i ~ p, project x onto the hyperplane of row i.
/// Touches only i and its neighbours.
inline int kaczmarz_step(const LinearSystem& sys, SolverState& state) {
    const int i = sys.sample_node(state.rng);
    const double r = sys.residual(i, state.x);
    const double coef = r / sys.row_norm_sq(i);
    state.x[i] += coef * static_cast<double>(sys.degree(i));
    for (int j : sys.neighbors(i)) state.x[j] -= coef;
    ++state.iteration;
    state.touched_entries += static_cast<unsigned long long>(sys.degree(i)) + 1;
    return i;
}

/// w_i = exp(x_i - mean(x)): log-weights mapped back to weights with the
/// additive gauge fixed so the geometric mean is 1.
inline WeightVector weights_from_iterate(std::span<const double> x) {
    if (x.empty()) throw parameter_error("weights_from_iterate: empty iterate");
    double mean = 0.0;
    for (double v : x) {
        if (!std::isfinite(v)) throw parameter_error("weights_from_iterate: non-finite iterate");
        mean += v;
    }
    mean /= static_cast<double>(x.size());
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        w[i] = std::exp(x[i] - mean);
        if (!std::isfinite(w[i]) || w[i] <= 0.0)
            throw numeric_error("weights_from_iterate: overflow after gauge centering");
    }
    return WeightVector(std::move(w));
}

/// Stopping criteria of the experiment section:
///   RelWeightChange (I1/I2):  ||w(n) - w(n-window)|| / ||w(n-window)|| <= tol,
///                             computed on w = exp(x);
///   DwConverged     (I3):     |D_w(n) - D_w(n-window)| <= tol, needs ground truth;
///   TopKInM         (I4):     true top-K inside estimated top-M, needs ground truth.
struct StoppingRule {
    enum class Kind { RelWeightChange, DwConverged, TopKInM };

    Kind kind = Kind::RelWeightChange;
    int window = 500;
    double tol = 1e-7;
    int top_k = 0;
    int top_m = 0;

    static StoppingRule rel_weight_change(int window = 500, double tol = 1e-7) {
        return {Kind::RelWeightChange, window, tol, 0, 0};
    }
    static StoppingRule dw_converged(int window = 500, double tol = 1e-7) {
        return {Kind::DwConverged, window, tol, 0, 0};
    }
    static StoppingRule top_k_in_m_rule(int k, int m) {
        return {Kind::TopKInM, 0, 0.0, k, m};
    }

    bool needs_ground_truth() const { return kind != Kind::RelWeightChange; }

    std::string name() const {
        switch (kind) {
            case Kind::RelWeightChange: return "rel_weight_change";
            case Kind::DwConverged: return "dw_converged";
            case Kind::TopKInM:
                return "top_" + std::to_string(top_k) + "_in_" + std::to_string(top_m);
        }
        return "?";
    }
};

/// Watches an iterate stream and reports when its rule fires. Several
/// monitors can observe the same trajectory, which is how stopping rules are
/// compared on shared data.
class StoppingMonitor {
public:
    StoppingMonitor(const StoppingRule& rule, int n, const WeightVector* ground_truth)
        : rule_(rule), n_(n) {
        if (rule_.needs_ground_truth()) {
            if (ground_truth == nullptr)
                throw config_error("stopping rule " + rule_.name() + " requires ground-truth weights");
            if (ground_truth->size() != n)
                throw config_error("stopping rule: ground-truth size mismatch");
            truth_ = *ground_truth;
            truth_order_ = ordering_from_weights(truth_);
        }
        if (rule_.kind != StoppingRule::Kind::TopKInM) {
            if (rule_.window < 1) throw config_error("stopping rule: window must be >= 1");
            if (!(rule_.tol >= 0.0)) throw config_error("stopping rule: tol must be >= 0");
        } else if (rule_.top_k < 1 || rule_.top_m < rule_.top_k || rule_.top_m > n) {
            throw config_error("stopping rule: need 1 <= K <= M <= n");
        }
        if (rule_.kind == StoppingRule::Kind::RelWeightChange)
            weight_ring_.assign(static_cast<std::size_t>(rule_.window) * n_, 0.0);
        if (rule_.kind == StoppingRule::Kind::DwConverged)
            dw_ring_.assign(rule_.window, 0.0);
    }

    bool fired() const { return fired_; }
    long long fired_iteration() const { return fired_iteration_; }

    /// Feed the iterate at `iteration` (call once per iteration, including 0).
    /// Returns true once the rule has fired; afterwards observe() is a no-op.
    bool observe(std::span<const double> x, long long iteration) {
        if (fired_) return true;
        switch (rule_.kind) {
            case StoppingRule::Kind::RelWeightChange: observe_weight_change(x, iteration); break;
            case StoppingRule::Kind::DwConverged: observe_dw(x, iteration); break;
            case StoppingRule::Kind::TopKInM: observe_topk(x, iteration); break;
        }
        return fired_;
    }

private:
    void observe_weight_change(std::span<const double> x, long long iteration) {
        scratch_.resize(n_);
        for (int i = 0; i < n_; ++i) scratch_[i] = std::exp(x[i]);
        double* slot = &weight_ring_[static_cast<std::size_t>(iteration % rule_.window) * n_];
        if (iteration >= rule_.window) {
            double diff2 = 0.0, old2 = 0.0;
            for (int i = 0; i < n_; ++i) {
                const double d = scratch_[i] - slot[i];
                diff2 += d * d;
                old2 += slot[i] * slot[i];
            }
            if (old2 > 0.0 && std::sqrt(diff2) <= rule_.tol * std::sqrt(old2)) fire(iteration);
        }
        std::copy(scratch_.begin(), scratch_.end(), slot);
    }

    void observe_dw(std::span<const double> x, long long iteration) {
        // D_w depends only on the induced ordering; recompute it only when the
        // ordering actually changed.
        Ordering est = ordering_from_scores(x);
        if (!have_dw_ || est.position != last_order_.position) {
            last_dw_ = d_w(truth_, est);
            last_order_ = std::move(est);
            have_dw_ = true;
        }
        const int slot = static_cast<int>(iteration % rule_.window);
        if (iteration >= rule_.window && std::abs(last_dw_ - dw_ring_[slot]) <= rule_.tol)
            fire(iteration);
        dw_ring_[slot] = last_dw_;
    }

    void observe_topk(std::span<const double> x, long long iteration) {
        const Ordering est = ordering_from_scores(x);
        if (top_k_in_m(truth_order_, est, rule_.top_k, rule_.top_m)) fire(iteration);
    }

    void fire(long long iteration) {
        fired_ = true;
        fired_iteration_ = iteration;
    }

    StoppingRule rule_;
    int n_;
    WeightVector truth_;
    Ordering truth_order_;
    std::vector<double> weight_ring_;
    std::vector<double> dw_ring_;
    std::vector<double> scratch_;
    Ordering last_order_;
    double last_dw_ = 0.0;
    bool have_dw_ = false;
    bool fired_ = false;
    long long fired_iteration_ = -1;
};

struct SolveOptions {
    StoppingRule stop = StoppingRule::rel_weight_change();
    long long max_iters = 200000;
    std::uint64_t seed = 1;
    const WeightVector* ground_truth = nullptr; // required by I3/I4
    const std::vector<double>* error_reference = nullptr; // record ||x - ref|| if set
};

struct SolveReport {
    std::vector<double> x;
    long long iterations = 0;
    bool stopped = false;          // rule fired (false: max_iters guard)
    std::string stop_rule;
    double wall_seconds = 0.0;
    double mean_touched_per_iteration = 0.0;
    bool graph_connected = true;
    std::vector<double> error_trace; // ||x - ref|| per iteration, if requested
};

/// Runs kaczmarz_step until the stopping rule fires or max_iters is reached.
/// On disconnected graphs the iterates converge per component to the point
/// fixed by each component's initial coordinate sum; isolated nodes are never
/// sampled and keep their initial value.
inline SolveReport solve(const LinearSystem& sys, std::vector<double> init, const SolveOptions& opt) {
    if (opt.max_iters < 1) throw parameter_error("solve: max_iters must be >= 1");
    if (static_cast<int>(init.size()) != sys.size()) throw parameter_error("solve: init size mismatch");
    const auto t0 = std::chrono::steady_clock::now();

    SolverState state(std::move(init), opt.seed);
    StoppingMonitor monitor(opt.stop, sys.size(), opt.ground_truth);

    SolveReport rep;
    rep.stop_rule = opt.stop.name();
    rep.graph_connected = sys.connected();

    auto record_error = [&]() {
        if (!opt.error_reference) return;
        double e2 = 0.0;
        for (int i = 0; i < sys.size(); ++i) {
            const double d = state.x[i] - (*opt.error_reference)[i];
            e2 += d * d;
        }
        rep.error_trace.push_back(std::sqrt(e2));
    };

    record_error();
    bool fired = monitor.observe(state.x, 0);
    while (!fired && state.iteration < opt.max_iters) {
        kaczmarz_step(sys, state);
        record_error();
        fired = monitor.observe(state.x, state.iteration);
    }

    rep.x = std::move(state.x);
    rep.iterations = fired ? monitor.fired_iteration() : state.iteration;
    rep.stopped = fired;
    rep.mean_touched_per_iteration =
        state.iteration > 0 ? static_cast<double>(state.touched_entries) / static_cast<double>(state.iteration)
                            : 0.0;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// BFS warm start: x_ref = 0 and every BFS child j of parent i gets
/// x_j = x_i - y_ij, telescoping edge logits along shortest paths. Nodes
/// outside ref's component stay at 0. Cost O(M).
inline std::vector<double> warm_start(const ComparisonGraph& g, const EdgeObservations& obs,
                                      int ref, double eps) {
    if (ref < 0 || ref >= g.node_count()) throw parameter_error("warm_start: ref out of range");
    std::vector<double> x(g.node_count(), 0.0);
    std::vector<char> seen(g.node_count(), 0);
    std::queue<int> q;
    seen[ref] = 1;
    q.push(ref);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : g.neighbors(u)) {
            if (seen[v]) continue;
            seen[v] = 1;
            x[v] = x[u] - obs.y_directed(u, v, eps);
            q.push(v);
        }
    }
    return x;
}

enum class TrackingEndpoint { SmallerIndex, LargerIndex, Random };

/// Constant-step-size stochastic-approximation update for slowly drifting
/// weights: fold the new outcome into the running tallies, refresh the
/// affected entries of b, then relax the iterate a fraction c of the way onto
/// the hyperplane of the chosen endpoint's row. With c = 1 and static data
/// this is exactly kaczmarz_step applied at that node; with c = 0 the iterate
/// is untouched.
inline RunningUpdate tracking_step(LinearSystem& sys, SolverState& state, double c,
                                   int i, int j, int outcome, EdgeObservations& obs, double eps,
                                   TrackingEndpoint endpoint = TrackingEndpoint::SmallerIndex) {
    if (!(c >= 0.0) || c > 1.0) throw parameter_error("tracking_step: need 0 <= c <= 1");
    if (i == j) throw parameter_error("tracking_step: i == j");
    const int lo = std::min(i, j), hi = std::max(i, j);
    const int existing = obs.find_edge(lo, hi);
    const double y_old = existing >= 0 ? obs.y(existing, eps) : 0.0;
    const RunningUpdate upd = update_running_estimate(obs, i, j, outcome);
    if (upd.inserted) sys.insert_edge(lo, hi);
    const double y_new = obs.y(upd.edge, eps);
    sys.shift_rhs(lo, hi, y_old, y_new);

    if (c > 0.0) {
        int m = lo;
        if (endpoint == TrackingEndpoint::LargerIndex) m = hi;
        else if (endpoint == TrackingEndpoint::Random) m = bernoulli(state.rng, 0.5) ? hi : lo;
        const double r = sys.residual(m, state.x);
        const double coef = c * r / sys.row_norm_sq(m);
        state.x[m] += coef * static_cast<double>(sys.degree(m));
        for (int v : sys.neighbors(m)) state.x[v] -= coef;
        state.touched_entries += static_cast<unsigned long long>(sys.degree(m)) + 1;
    }
    ++state.iteration;
    return upd;
}

} // namespace pairrank
