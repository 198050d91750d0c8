#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "serialdep/types.hpp"

namespace serialdep {

enum class Estimator { biased_v, unbiased_u };

struct DcovValue {
    double v2 = 0.0;
    Estimator estimator = Estimator::biased_v;
};

namespace detail {

/// Prefix sums over (count, y, x, x*y) indexed by 1-based rank.
class QuadFenwick {
   public:
    struct Sums {
        long double count = 0, sy = 0, sx = 0, sxy = 0;
        Sums& operator+=(const Sums& o) {
            count += o.count;
            sy += o.sy;
            sx += o.sx;
            sxy += o.sxy;
            return *this;
        }
    };

    explicit QuadFenwick(std::size_t size) : tree_(size + 1) {}

    void add(std::size_t rank, const Sums& s) {
        for (; rank < tree_.size(); rank += rank & (~rank + 1)) tree_[rank] += s;
    }

    Sums prefix(std::size_t rank) const {
        Sums out;
        for (; rank > 0; rank -= rank & (~rank + 1)) out += tree_[rank];
        return out;
    }

   private:
    std::vector<Sums> tree_;
};

inline std::vector<std::size_t> argsort(std::span<const long double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
}

/// a_i = sum_j |v_i - v_j| for every i, from the sorted order and prefix sums.
inline std::vector<long double> abs_row_sums(std::span<const long double> v,
                                             const std::vector<std::size_t>& order) {
    const std::size_t n = v.size();
    long double total = 0;
    for (long double e : v) total += e;
    std::vector<long double> out(n);
    long double below = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        const long double vi = v[i];
        const long double above = total - below - vi;
        out[i] = vi * static_cast<long double>(k) - below + above -
                 vi * static_cast<long double>(n - k - 1);
        below += vi;
    }
    return out;
}

inline std::vector<long double> centered_copy(std::span<const double> x) {
    long double mean = 0;
    for (double e : x) mean += e;
    mean /= static_cast<long double>(x.size());
    std::vector<long double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<long double>(x[i]) - mean;
    return out;
}

}  // namespace detail

/// Biased (V-statistic) squared distance covariance of two univariate samples in
/// O(n log n): row sums from sorted prefix sums, and the cross term
/// sum_{i,j} |x_i - x_j| |y_i - y_j| by a rank-indexed Fenwick sweep in x order.
inline DcovValue dcov_fast_univariate(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size(), "dcov_fast_univariate: length mismatch");
    detail::require(x.size() >= 1, "dcov_fast_univariate: empty input");
    detail::require_finite(x, "dcov_fast_univariate");
    detail::require_finite(y, "dcov_fast_univariate");
    const std::size_t n = x.size();

    const auto xs = detail::centered_copy(x);
    const auto ys = detail::centered_copy(y);
    const auto order_x = detail::argsort(xs);
    const auto order_y = detail::argsort(ys);
    const auto a = detail::abs_row_sums(xs, order_x);
    const auto b = detail::abs_row_sums(ys, order_y);

    long double sum_a = 0, sum_b = 0, cross = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_a += a[i];
        sum_b += b[i];
        cross += a[i] * b[i];
    }

    // Dense 1-based ranks of y; equal y values share a rank.
    std::vector<std::size_t> rank(n);
    std::size_t r = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || ys[order_y[k]] != ys[order_y[k - 1]]) ++r;
        rank[order_y[k]] = r;
    }

    detail::QuadFenwick tree(r);
    detail::QuadFenwick::Sums inserted;
    long double pair_sum = 0;
    auto signed_part = [](const detail::QuadFenwick::Sums& s, long double xj, long double yj) {
        return s.count * xj * yj - xj * s.sy - yj * s.sx + s.sxy;
    };
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order_x[k];
        const long double xj = xs[j], yj = ys[j];
        const auto lower = tree.prefix(rank[j] - 1);
        auto upper = inserted;
        const auto at_or_below = tree.prefix(rank[j]);
        upper.count -= at_or_below.count;
        upper.sy -= at_or_below.sy;
        upper.sx -= at_or_below.sx;
        upper.sxy -= at_or_below.sxy;
        pair_sum += signed_part(lower, xj, yj) - signed_part(upper, xj, yj);
        const detail::QuadFenwick::Sums s{1, yj, xj, xj * yj};
        tree.add(rank[j], s);
        inserted += s;
    }

    const long double nn = static_cast<long double>(n);
    const long double v2 = 2 * pair_sum / (nn * nn) + sum_a * sum_b / (nn * nn * nn * nn) -
                           2 * cross / (nn * nn * nn);
    return {std::max(0.0, static_cast<double>(v2)), Estimator::biased_v};
}

template <class S>
    requires std::same_as<S, Sample>
DcovValue dcov_fast_univariate(const S& x, const S& y) {
    detail::require(x.dim() == 1 && y.dim() == 1,
                    "dcov_fast_univariate: multivariate input not supported");
    return dcov_fast_univariate(std::span<const double>(x.values().data(), x.rows()),
                                std::span<const double>(y.values().data(), y.rows()));
}

}  // namespace serialdep
