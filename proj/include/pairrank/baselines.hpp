#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pairrank/btl.hpp"
#include "pairrank/errors.hpp"
#include "pairrank/graph.hpp"

namespace pairrank {

/// Row-stochastic comparison chain of the Rank Centrality estimator, stored
/// implicitly: per-edge off-diagonal hop probabilities plus the diagonal
/// remainders. P[i -> j] = p-hat_ji / d_max for neighbours j (hop toward the
/// winner), diagonal = 1 - row sum.
struct TransitionMatrix {
    int n = 0;
    std::vector<std::pair<int, int>> edges; // canonical (i < j)
    std::vector<double> p_lo;               // p-hat of the smaller endpoint per edge
    std::vector<double> diagonal;
    double d_max = 0.0;

    TransitionMatrix(const ComparisonGraph& g, const EdgeObservations& obs, double eps)
        : n(g.node_count()), edges(g.edges()) {
        int dm = 0;
        for (int i = 0; i < n; ++i) dm = std::max(dm, g.degree(i));
        if (dm == 0) throw parameter_error("rank_centrality: graph has no edges");
        d_max = static_cast<double>(dm);
        p_lo.resize(edges.size());
        diagonal.assign(n, 1.0);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto [i, j] = edges[e];
            const int oe = obs.find_edge(i, j);
            if (oe < 0) throw parameter_error("rank_centrality: missing observations on an edge");
            const double pij = obs.p_hat(oe, eps);
            p_lo[e] = pij;
            diagonal[i] -= (1.0 - pij) / d_max; // i -> j with prob p-hat_ji
            diagonal[j] -= pij / d_max;         // j -> i with prob p-hat_ij
        }
    }

    /// dst = pi^T P (one step of the chain).
    void step(const std::vector<double>& pi, std::vector<double>& dst) const {
        for (int i = 0; i < n; ++i) dst[i] = pi[i] * diagonal[i];
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto [i, j] = edges[e];
            dst[j] += pi[i] * (1.0 - p_lo[e]) / d_max;
            dst[i] += pi[j] * p_lo[e] / d_max;
        }
    }
};

/// Rank Centrality: stationary distribution of the comparison chain, power
/// iterated to an l1 step-change of rel_tol, returned gauge-normalized to
/// geometric mean 1. Expects a connected graph; callers should warn
/// otherwise.
inline WeightVector rank_centrality(const ComparisonGraph& g, const EdgeObservations& obs,
                                    double eps, double rel_tol = 1e-10,
                                    long max_iterations = 2000000) {
    const TransitionMatrix P(g, obs, eps);
    const int n = P.n;
    std::vector<double> pi(n, 1.0 / n), next(n);
    double change = 0.0;
    for (long it = 0; it < max_iterations; ++it) {
        P.step(pi, next);
        change = 0.0;
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            change += std::abs(next[i] - pi[i]);
            total += next[i];
        }
        for (int i = 0; i < n; ++i) next[i] /= total;
        pi.swap(next);
        if (change <= rel_tol) {
            std::vector<double> w(pi);
            double log_mean = 0.0;
            for (double v : w) {
                if (!(v > 0.0))
                    throw numeric_error("rank_centrality: stationary mass vanished on a node");
                log_mean += std::log(v);
            }
            log_mean /= n;
            for (double& v : w) v = std::exp(std::log(v) - log_mean);
            return WeightVector(std::move(w));
        }
    }
    throw numeric_error("rank_centrality: power iteration did not converge to " +
                        std::to_string(rel_tol) + " within the iteration cap");
}

/// Regularized BTL maximum likelihood: maximizes
///   sum_edges [ wins_ij log sigma(th_i - th_j) + wins_ji log sigma(th_j - th_i) ]
///   - lambda/2 ||th||^2
/// by full-gradient ascent with backtracking line search until the gradient
/// norm drops to grad_tol. lambda = 0 is the plain BTL MLE; it diverges on
/// degenerate data (an item that never loses), which is reported as an error
/// suggesting lambda > 0.
inline WeightVector regularized_mle(const ComparisonGraph& g, const EdgeObservations& obs,
                                    double lambda, double grad_tol = 1e-8,
                                    long max_iterations = 50000) {
    if (lambda < 0.0) throw parameter_error("regularized_mle: lambda must be >= 0");
    const int n = g.node_count();
    const auto& edges = g.edges();
    std::vector<long long> wlo(edges.size()), whi(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const int oe = obs.find_edge(edges[e].first, edges[e].second);
        if (oe < 0) throw parameter_error("regularized_mle: missing observations on an edge");
        const auto t = obs.tally(oe);
        wlo[e] = t.first;
        whi[e] = t.second;
    }

    auto log_sigmoid = [](double d) {
        // log sigma(d), stable for both signs
        return d >= 0.0 ? -std::log1p(std::exp(-d)) : d - std::log1p(std::exp(d));
    };
    auto objective = [&](const std::vector<double>& th) {
        double f = 0.0;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const double d = th[edges[e].first] - th[edges[e].second];
            f += static_cast<double>(wlo[e]) * log_sigmoid(d) +
                 static_cast<double>(whi[e]) * log_sigmoid(-d);
        }
        if (lambda > 0.0)
            for (double v : th) f -= 0.5 * lambda * v * v;
        return f;
    };
    auto gradient = [&](const std::vector<double>& th, std::vector<double>& grad) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto [i, j] = edges[e];
            const double d = th[i] - th[j];
            const double sig = 1.0 / (1.0 + std::exp(-d));
            const double ge = static_cast<double>(wlo[e]) * (1.0 - sig) -
                              static_cast<double>(whi[e]) * sig;
            grad[i] += ge;
            grad[j] -= ge;
        }
        if (lambda > 0.0)
            for (int i = 0; i < n; ++i) grad[i] -= lambda * th[i];
    };

    std::vector<double> th(n, 0.0), grad(n), trial(n);
    double f = objective(th);
    double step = 1.0 / (1.0 + static_cast<double>(obs.total_comparisons()) / std::max(1, n));
    for (long it = 0; it < max_iterations; ++it) {
        gradient(th, grad);
        double g2 = 0.0;
        for (double v : grad) g2 += v * v;
        if (std::sqrt(g2) <= grad_tol) {
            double mean = 0.0;
            for (double v : th) mean += v;
            mean /= n;
            std::vector<double> w(n);
            for (int i = 0; i < n; ++i) w[i] = std::exp(th[i] - mean);
            return WeightVector(std::move(w));
        }
        step *= 2.0;
        for (;;) {
            for (int i = 0; i < n; ++i) trial[i] = th[i] + step * grad[i];
            const double ft = objective(trial);
            if (ft >= f + 0.3 * step * g2 && std::isfinite(ft)) {
                th.swap(trial);
                f = ft;
                break;
            }
            step *= 0.5;
            if (step < 1e-18)
                throw numeric_error("regularized_mle: line search stalled; data may be degenerate, "
                                    "try lambda > 0");
        }
    }
    throw numeric_error("regularized_mle: gradient ascent did not reach tolerance; with lambda = 0 "
                        "and one-sided records the MLE diverges, use lambda > 0");
}

} // namespace pairrank
