#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pairrank/errors.hpp"

namespace pairrank {

/// splitmix64 mixing step; used to derive independent seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive the seed of an independent stream from (master seed, stream index).
/// Trials, edges, etc. each get their own stream so parallel execution cannot
/// change results.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x51ed2701ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(splitmix64(seed));
}

/// Uniform double in [0, 1) from the top 53 bits; avoids the
/// implementation-defined behaviour of std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(std::mt19937_64& rng, double p) {
    return uniform01(rng) < p;
}

/// Gaussian via Box-Muller on our own uniforms (deterministic across stdlibs).
inline double gaussian(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

/// Walker/Vose alias table for O(1) draws from a fixed categorical
/// distribution. Zero-weight entries are never drawn.
class AliasTable {
public:
    AliasTable() = default;

    explicit AliasTable(const std::vector<double>& weights) {
        const std::size_t n = weights.size();
        if (n == 0) throw parameter_error("AliasTable: empty weight vector");
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw parameter_error("AliasTable: negative weight");
            total += w;
        }
        if (total <= 0.0) throw parameter_error("AliasTable: all weights zero");
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;
        std::vector<std::uint32_t> small, large;
        small.reserve(n);
        large.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back();
            const std::uint32_t l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (std::uint32_t l : large) prob_[l] = 1.0;
        for (std::uint32_t s : small) prob_[s] = 1.0; // numerical leftovers
    }

    std::uint32_t sample(std::mt19937_64& rng) const {
        const std::uint64_t bits = rng();
        const auto k = static_cast<std::uint32_t>((bits >> 32) % prob_.size());
        const double u = static_cast<double>(bits & 0xffffffffULL) * 0x1.0p-32;
        return u < prob_[k] ? k : alias_[k];
    }

    std::size_t size() const { return prob_.size(); }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

} // namespace pairrank
