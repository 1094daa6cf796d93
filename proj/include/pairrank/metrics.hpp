#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "pairrank/btl.hpp"
#include "pairrank/errors.hpp"

namespace pairrank {

/// Rank position per item, 1 = best. Ties are broken by ascending item index,
/// so positions are always a permutation of 1..n.
struct Ordering {
    std::vector<int> position;     // position[item] in 1..n
    std::vector<int> items_by_rank; // items_by_rank[r-1] = item at position r

    int size() const { return static_cast<int>(position.size()); }
};

inline Ordering ordering_from_scores(std::span<const double> scores) {
    const int n = static_cast<int>(scores.size());
    Ordering o;
    o.items_by_rank.resize(n);
    std::iota(o.items_by_rank.begin(), o.items_by_rank.end(), 0);
    std::stable_sort(o.items_by_rank.begin(), o.items_by_rank.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    o.position.resize(n);
    for (int r = 0; r < n; ++r) o.position[o.items_by_rank[r]] = r + 1;
    return o;
}

inline Ordering ordering_from_weights(const WeightVector& w) {
    return ordering_from_scores(w.values);
}

/// ||w - c* w_est|| / ||w|| with the multiplicative gauge c* minimizing the
/// numerator: c* = <w, w_est> / ||w_est||^2.
inline double normalized_weight_error(const WeightVector& w_true, const WeightVector& w_est) {
    if (w_true.size() != w_est.size())
        throw parameter_error("normalized_weight_error: length mismatch");
    double dot = 0.0, est2 = 0.0, true2 = 0.0;
    for (int i = 0; i < w_true.size(); ++i) {
        dot += w_true[i] * w_est[i];
        est2 += w_est[i] * w_est[i];
        true2 += w_true[i] * w_true[i];
    }
    const double c = dot / est2;
    double num = 0.0;
    for (int i = 0; i < w_true.size(); ++i) {
        const double d = w_true[i] - c * w_est[i];
        num += d * d;
    }
    return std::sqrt(num / true2);
}

namespace detail {

/// Fenwick tree accumulating (count, sum w, sum w^2) keyed by true position.
class DwAccumulator {
public:
    explicit DwAccumulator(int n) : n_(n), cnt_(n + 1, 0.0), sw_(n + 1, 0.0), sw2_(n + 1, 0.0) {}

    void insert(int pos, double w) {
        for (int k = pos; k <= n_; k += k & -k) {
            cnt_[k] += 1.0;
            sw_[k] += w;
            sw2_[k] += w * w;
        }
    }

    // totals over true positions 1..pos
    void prefix(int pos, double& cnt, double& sw, double& sw2) const {
        cnt = sw = sw2 = 0.0;
        for (int k = pos; k > 0; k -= k & -k) {
            cnt += cnt_[k];
            sw += sw_[k];
            sw2 += sw2_[k];
        }
    }

private:
    int n_;
    std::vector<double> cnt_, sw_, sw2_;
};

} // namespace detail

/// Weighted discordant-pair ranking error
///   D_w = sqrt( 1/(2 n ||w||^2) * sum_{i<j} (w_i - w_j)^2 [pair discordant] ).
/// A pair is discordant when the heavier item is placed on a worse (larger)
/// position: (w_i - w_j)(pos_i - pos_j) > 0. Ties contribute nothing.
/// Runs in O(n log n): items are scanned in estimated order while a Fenwick
/// tree keyed by true position accumulates the already-seen (lighter-or-equal
/// placed-better) mass.
inline double d_w(const WeightVector& w_true, const Ordering& est) {
    const int n = w_true.size();
    if (est.size() != n) throw parameter_error("d_w: length mismatch");
    const Ordering truth = ordering_from_weights(w_true);
    double w2 = 0.0;
    for (int i = 0; i < n; ++i) w2 += w_true[i] * w_true[i];

    // Pair (a, b) with a estimated-better is discordant iff w_a < w_b, i.e.
    // a's true position is worse. Equal weights have adjacent true positions
    // and contribute (w_a - w_b)^2 = 0, so counting them either way is
    // harmless.
    detail::DwAccumulator acc(n);
    double s = 0.0;
    double total_cnt = 0.0, total_sw = 0.0, total_sw2 = 0.0;
    for (int r = 0; r < n; ++r) {
        const int b = est.items_by_rank[r];
        const double wb = w_true[b];
        const int tb = truth.position[b];
        double c, sw, sw2;
        acc.prefix(tb, c, sw, sw2); // seen items truly at-or-better than b
        const double worse_cnt = total_cnt - c;
        const double worse_sw = total_sw - sw;
        const double worse_sw2 = total_sw2 - sw2;
        s += worse_cnt * wb * wb - 2.0 * wb * worse_sw + worse_sw2;
        acc.insert(tb, wb);
        total_cnt += 1.0;
        total_sw += wb;
        total_sw2 += wb * wb;
    }
    s = std::max(s, 0.0);
    return std::sqrt(s / (2.0 * n * w2));
}

/// True iff the true top-K items all appear in the estimated top-M.
inline bool top_k_in_m(const Ordering& truth, const Ordering& est, int K, int M) {
    const int n = truth.size();
    if (est.size() != n) throw parameter_error("top_k_in_m: length mismatch");
    if (K < 1 || M < K || M > n) throw parameter_error("top_k_in_m: need 1 <= K <= M <= n");
    for (int r = 0; r < K; ++r)
        if (est.position[truth.items_by_rank[r]] > M) return false;
    return true;
}

/// Total wins over total losses of item i across all edges. All-wins items
/// report +infinity.
inline double win_ratio(const EdgeObservations& obs, int i) {
    const long long w = obs.wins_of(i);
    const long long l = obs.losses_of(i);
    if (w + l == 0) throw parameter_error("win_ratio: item has no comparisons");
    if (l == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(w) / static_cast<double>(l);
}

} // namespace pairrank
