#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "pairrank/errors.hpp"
#include "pairrank/rng.hpp"

namespace pairrank {

/// Undirected comparison graph over n items. Edges are stored once,
/// canonically as (i, j) with i < j; adjacency lists are kept symmetric.
/// Immutable after construction.
class ComparisonGraph {
public:
    ComparisonGraph() = default;

    /// Builds from a canonical edge list. Rejects self-loops, out-of-range
    /// nodes and duplicate edges.
    static ComparisonGraph from_edges(int n, std::vector<std::pair<int, int>> edges) {
        if (n < 1) throw parameter_error("graph: need n >= 1");
        ComparisonGraph g;
        g.n_ = n;
        for (auto& [a, b] : edges) {
            if (a > b) std::swap(a, b);
            if (a == b) throw parameter_error("graph: self-loop " + std::to_string(a));
            if (a < 0 || b >= n) throw parameter_error("graph: node out of range");
        }
        std::sort(edges.begin(), edges.end());
        if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
            throw parameter_error("graph: duplicate edge");
        g.edges_ = std::move(edges);
        g.adjacency_.assign(n, {});
        for (auto [a, b] : g.edges_) {
            g.adjacency_[a].push_back(b);
            g.adjacency_[b].push_back(a);
        }
        return g;
    }

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int i) const { return adjacency_[check(i)]; }
    int degree(int i) const { return static_cast<int>(adjacency_[check(i)].size()); }

    /// ||a_i||^2 of the implicit Laplacian row: degree^2 + degree.
    double row_norm_sq(int i) const {
        const double d = static_cast<double>(degree(i));
        return d * d + d;
    }

private:
    int check(int i) const {
        if (i < 0 || i >= n_) throw parameter_error("graph: node " + std::to_string(i) + " out of range");
        return i;
    }

    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adjacency_;
};

/// Row-wise view of the graph Laplacian A = LL^T. Rows are produced from the
/// adjacency lists; the incidence matrix L is never materialized.
class LaplacianView {
public:
    explicit LaplacianView(const ComparisonGraph& g) : g_(&g) {}

    int size() const { return g_->node_count(); }
    double row_norm_sq(int i) const { return g_->row_norm_sq(i); }

    /// <a_i, x> = deg(i) x_i - sum_{j in N(i)} x_j.
    double apply_row(int i, std::span<const double> x) const {
        double s = static_cast<double>(g_->degree(i)) * x[i];
        for (int j : g_->neighbors(i)) s -= x[j];
        return s;
    }

    const ComparisonGraph& graph() const { return *g_; }

private:
    const ComparisonGraph* g_;
};

/// G(n, p): every unordered pair becomes an edge independently with
/// probability p. Same seed, same edge set.
inline ComparisonGraph erdos_renyi(int n, double p, std::uint64_t seed) {
    if (n < 2) throw parameter_error("erdos_renyi: need n >= 2");
    if (!(p > 0.0) || p > 1.0) throw parameter_error("erdos_renyi: need 0 < p <= 1");
    auto rng = make_rng(derive_seed(seed, 0xe2d05ULL));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (bernoulli(rng, p)) edges.emplace_back(i, j);
    return ComparisonGraph::from_edges(n, std::move(edges));
}

struct ComponentLabeling {
    bool connected = false;
    int count = 0;
    std::vector<int> label; // component id per node, BFS order
};

/// BFS component labeling.
inline ComponentLabeling components(const ComparisonGraph& g) {
    ComponentLabeling out;
    const int n = g.node_count();
    out.label.assign(n, -1);
    for (int s = 0; s < n; ++s) {
        if (out.label[s] != -1) continue;
        const int id = out.count++;
        std::queue<int> q;
        q.push(s);
        out.label[s] = id;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : g.neighbors(u)) {
                if (out.label[v] == -1) {
                    out.label[v] = id;
                    q.push(v);
                }
            }
        }
    }
    out.connected = (out.count == 1);
    return out;
}

inline bool is_connected(const ComparisonGraph& g) { return components(g).connected; }

} // namespace pairrank
