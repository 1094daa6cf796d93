#pragma once

#include <cmath>
#include <vector>

#include "pairrank/errors.hpp"
#include "pairrank/graph.hpp"
#include "pairrank/rng.hpp"

namespace pairrank {

struct LaplacianSpectrum {
    double lambda_max = 0.0;
    double lambda_min_nonzero = 0.0; // algebraic connectivity when connected
    bool connected = false;          // when false, lambda_min_nonzero degenerates to ~0
};

namespace detail {

inline void project_out_ones(std::vector<double>& z) {
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    for (double& v : z) v -= mean;
}

inline double normalize(std::vector<double>& z) {
    double n2 = 0.0;
    for (double v : z) n2 += v * v;
    const double n = std::sqrt(n2);
    if (n > 0.0)
        for (double& v : z) v /= n;
    return n;
}

} // namespace detail

/// Extreme Laplacian eigenvalues by power iteration, intended for test-scale
/// graphs (n up to a few hundred). lambda_max comes from iterating A itself;
/// the smallest nonzero eigenvalue from iterating (lambda_max I - A) on the
/// subspace orthogonal to the all-one vector (the kernel direction of a
/// connected graph). Rayleigh quotients are iterated to stationarity well
/// below rel_tol.
inline LaplacianSpectrum laplacian_extreme_eigenvalues(const ComparisonGraph& g,
                                                       double rel_tol = 1e-8,
                                                       long max_iterations = 400000) {
    const int n = g.node_count();
    if (n < 2) throw parameter_error("laplacian_extreme_eigenvalues: need n >= 2");
    if (g.edge_count() == 0) throw parameter_error("laplacian_extreme_eigenvalues: empty graph");
    LaplacianSpectrum out;
    out.connected = is_connected(g);
    LaplacianView lap(g);

    auto apply_laplacian = [&](const std::vector<double>& z, std::vector<double>& dst) {
        for (int i = 0; i < n; ++i) dst[i] = lap.apply_row(i, z);
    };

    auto seeded_start = [&](std::uint64_t salt) {
        auto rng = make_rng(derive_seed(0x5bec7aULL, salt));
        std::vector<double> z(n);
        for (double& v : z) v = uniform01(rng) - 0.5;
        detail::project_out_ones(z);
        detail::normalize(z);
        return z;
    };

    const double tol = rel_tol * 1e-4; // Rayleigh stationarity margin

    // lambda_max
    {
        std::vector<double> z = seeded_start(1), az(n);
        double rayleigh = 0.0;
        for (long it = 0; it < max_iterations; ++it) {
            apply_laplacian(z, az);
            double num = 0.0;
            for (int i = 0; i < n; ++i) num += z[i] * az[i];
            const double prev = rayleigh;
            rayleigh = num; // z has unit norm
            detail::project_out_ones(az);
            if (detail::normalize(az) == 0.0) break;
            z.swap(az);
            if (it > 2 && std::abs(rayleigh - prev) <= tol * std::max(1.0, std::abs(rayleigh))) break;
        }
        out.lambda_max = rayleigh;
    }

    // smallest nonzero eigenvalue via the shifted operator
    {
        const double shift = out.lambda_max;
        std::vector<double> z = seeded_start(2), az(n), bz(n);
        double rayleigh_b = 0.0;
        for (long it = 0; it < max_iterations; ++it) {
            apply_laplacian(z, az);
            for (int i = 0; i < n; ++i) bz[i] = shift * z[i] - az[i];
            double num = 0.0;
            for (int i = 0; i < n; ++i) num += z[i] * bz[i];
            const double prev = rayleigh_b;
            rayleigh_b = num;
            detail::project_out_ones(bz);
            if (detail::normalize(bz) == 0.0) break; // B vanishes on 1-perp (complete graph)
            z.swap(bz);
            if (it > 2 && std::abs(rayleigh_b - prev) <= tol * std::max(1.0, std::abs(rayleigh_b))) break;
        }
        out.lambda_min_nonzero = shift - rayleigh_b;
    }
    return out;
}

} // namespace pairrank
