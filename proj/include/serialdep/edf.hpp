#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "serialdep/types.hpp"

namespace serialdep {

/// F(x) = (1/N) #{t : X_t <= x}.
class MarginalEdf {
   public:
    explicit MarginalEdf(std::span<const double> x) : sorted_(x.begin(), x.end()) {
        detail::require(!sorted_.empty(), "edf: need at least one observation");
        std::sort(sorted_.begin(), sorted_.end());
    }

    double operator()(double at) const {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), at);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

   private:
    std::vector<double> sorted_;
};

/// F(x, y) = (1/N) #{t : X_t <= x, Y_t <= y}.
class JointEdf {
   public:
    JointEdf(std::span<const double> x, std::span<const double> y) : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
        detail::require(!x_.empty() && x_.size() == y_.size(), "edf: need equal, nonzero lengths");
    }

    double operator()(double at_x, double at_y) const {
        std::size_t c = 0;
        for (std::size_t t = 0; t < x_.size(); ++t) c += (x_[t] <= at_x && y_[t] <= at_y) ? 1 : 0;
        return static_cast<double>(c) / static_cast<double>(x_.size());
    }

   private:
    std::vector<double> x_, y_;
};

inline MarginalEdf edf_marginal(std::span<const double> x) { return MarginalEdf(x); }
inline JointEdf edf_joint(std::span<const double> x, std::span<const double> y) { return JointEdf(x, y); }

namespace detail {

/// 1-based dense ranks: equal values share a rank.
inline std::vector<std::size_t> dense_ranks(std::span<const double> v, std::size_t& distinct) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<std::size_t> rank(v.size());
    distinct = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k == 0 || v[order[k]] != v[order[k - 1]]) ++distinct;
        rank[order[k]] = distinct;
    }
    return rank;
}

/// Counts #{s : v_s <= v_t} for every t.
inline std::vector<std::size_t> weak_counts(const std::vector<std::size_t>& rank, std::size_t distinct) {
    std::vector<std::size_t> per_rank(distinct + 1, 0);
    for (std::size_t r : rank) ++per_rank[r];
    for (std::size_t r = 1; r <= distinct; ++r) per_rank[r] += per_rank[r - 1];
    std::vector<std::size_t> out(rank.size());
    for (std::size_t t = 0; t < rank.size(); ++t) out[t] = per_rank[rank[t]];
    return out;
}

/// Joint EDF gap at the sample points, F_XY(X_t, Y_t) - F_X(X_t) F_Y(Y_t), in O(N log N).
inline std::vector<double> edf_gaps_at_sample(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::size_t dx = 0, dy = 0;
    const auto rx = dense_ranks(x, dx);
    const auto ry = dense_ranks(y, dy);
    const auto cx = weak_counts(rx, dx);
    const auto cy = weak_counts(ry, dy);

    // Sweep x ranks upward; a Fenwick tree over y ranks counts inserted points.
    std::vector<std::size_t> by_x(n);
    std::iota(by_x.begin(), by_x.end(), std::size_t{0});
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) { return rx[a] < rx[b]; });
    std::vector<std::size_t> tree(dy + 1, 0);
    std::vector<std::size_t> joint(n);
    for (std::size_t k = 0; k < n;) {
        std::size_t m = k;
        while (m < n && rx[by_x[m]] == rx[by_x[k]]) {
            for (std::size_t r = ry[by_x[m]]; r <= dy; r += r & (~r + 1)) ++tree[r];
            ++m;
        }
        for (std::size_t q = k; q < m; ++q) {
            std::size_t c = 0;
            for (std::size_t r = ry[by_x[q]]; r > 0; r -= r & (~r + 1)) c += tree[r];
            joint[by_x[q]] = c;
        }
        k = m;
    }
    const double nn = static_cast<double>(n);
    std::vector<double> gap(n);
    for (std::size_t t = 0; t < n; ++t) {
        gap[t] = static_cast<double>(joint[t]) / nn -
                 (static_cast<double>(cx[t]) / nn) * (static_cast<double>(cy[t]) / nn);
    }
    return gap;
}

/// Cramer-von Mises type distance: the joint EDF integral becomes the sample average.
inline double cvm_distance(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && !x.empty(), "cvm_distance: need equal, nonzero lengths");
    const auto gap = edf_gaps_at_sample(x, y);
    double s = 0;
    for (double g : gap) s += g * g;
    return s / static_cast<double>(x.size());
}

/// Kolmogorov-Smirnov distance: sup over the grid {X_s} x {Y_t}, where the step functions
/// attain every value they take.
inline double ks_distance(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && !x.empty(), "ks_distance: need equal, nonzero lengths");
    const std::size_t n = x.size();
    std::size_t dx = 0, dy = 0;
    const auto rx = dense_ranks(x, dx);
    const auto ry = dense_ranks(y, dy);
    std::vector<std::size_t> by_x(n);
    std::iota(by_x.begin(), by_x.end(), std::size_t{0});
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) { return rx[a] < rx[b]; });

    // Marginal counts per y rank (cumulative).
    std::vector<double> fy(dy + 1, 0.0);
    for (std::size_t r : ry) fy[r] += 1.0;
    for (std::size_t r = 1; r <= dy; ++r) fy[r] += fy[r - 1];

    std::vector<double> inserted(dy + 1, 0.0);
    const double nn = static_cast<double>(n);
    double best = 0.0;
    std::size_t below = 0;
    for (std::size_t k = 0; k < n;) {
        std::size_t m = k;
        while (m < n && rx[by_x[m]] == rx[by_x[k]]) {
            inserted[ry[by_x[m]]] += 1.0;
            ++m;
        }
        below = m;
        const double fx = static_cast<double>(below) / nn;
        double cum = 0.0;
        for (std::size_t r = 1; r <= dy; ++r) {
            cum += inserted[r];
            best = std::max(best, std::abs(cum / nn - fx * fy[r] / nn));
        }
        k = m;
    }
    return best;
}

}  // namespace detail

}  // namespace serialdep
