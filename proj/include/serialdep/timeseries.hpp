#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <span>
#include <vector>

#include "serialdep/fast_dcov.hpp"
#include "serialdep/types.hpp"

namespace serialdep {

namespace detail {

inline std::size_t checked_lag(std::size_t n, int lag, std::size_t min_pairs) {
    const std::size_t j = static_cast<std::size_t>(std::abs(lag));
    if (n < min_pairs || j > n - min_pairs) {
        throw std::invalid_argument("lag too large for series length");
    }
    return j;
}

}  // namespace detail

/// Squared auto-distance covariance at lag j over the n - |j| overlapping pairs
/// (X_t, X_{t+|j|}); negative lags mirror positive ones.
inline double adcv(std::span<const double> x, int lag) {
    const std::size_t j = detail::checked_lag(x.size(), lag, 2);
    const std::size_t pairs = x.size() - j;
    return dcov_fast_univariate(x.subspan(0, pairs), x.subspan(j, pairs)).v2;
}

/// Auto-distance correlation R(j) = sqrt(V^2(j) / V^2(0)), with V^2(0) taken over the
/// full series; zero when V^2(0) vanishes.
inline double adcf(std::span<const double> x, int lag) {
    const double v0 = adcv(x, 0);
    const double vj = lag == 0 ? v0 : adcv(x, lag);
    if (!(v0 > 0.0)) return 0.0;
    return std::sqrt(std::clamp(vj / v0, 0.0, 1.0));
}

/// Pairwise matrix: entry (r, m) = V^2 between X_{t;r} and X_{t+j;m}.
/// For j < 0, V_rm(j) = V_mr(-j).
inline Matrix adcv_matrix(const MultiSeries& x, int lag) {
    const std::size_t j = detail::checked_lag(x.rows(), lag, 2);
    const std::size_t pairs = x.rows() - j;
    const std::size_t d = x.dim();
    Matrix out(d, d);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t m = 0; m < d; ++m) {
            out(r, m) = dcov_fast_univariate(x.component(r).subspan(0, pairs),
                                             x.component(m).subspan(j, pairs))
                            .v2;
        }
    }
    if (lag < 0) out.transposeInPlace();
    return out;
}

inline Matrix adcf_from_adcv(const Matrix& vj, const Vector& v0_diag) {
    Matrix out(vj.rows(), vj.cols());
    for (Eigen::Index r = 0; r < vj.rows(); ++r) {
        for (Eigen::Index m = 0; m < vj.cols(); ++m) {
            const double denom = v0_diag(r) * v0_diag(m);
            out(r, m) = denom > 0.0 ? std::sqrt(std::clamp(vj(r, m) / std::sqrt(denom), 0.0, 1.0)) : 0.0;
        }
    }
    return out;
}

/// Pairwise auto-distance correlation matrix R(j).
inline Matrix adcf_matrix(const MultiSeries& x, int lag) {
    const Matrix v0 = adcv_matrix(x, 0);
    const Matrix vj = lag == 0 ? v0 : adcv_matrix(x, lag);
    return adcf_from_adcv(vj, v0.diagonal());
}

/// Sample autocovariance with divisor n and grand-mean centering.
inline double autocov(std::span<const double> x, std::size_t lag) {
    const std::size_t n = x.size();
    detail::require(n >= 1 && lag < n, "autocov: lag must be below n");
    double mean = 0;
    for (double e : x) mean += e;
    mean /= static_cast<double>(n);
    double s = 0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - mean) * (x[t + lag] - mean);
    return s / static_cast<double>(n);
}

inline double acf(std::span<const double> x, int lag) {
    const std::size_t j = static_cast<std::size_t>(std::abs(lag));
    detail::require(j < x.size(), "acf: lag must be below n");
    const double g0 = autocov(x, 0);
    if (!(g0 > 0.0)) throw std::domain_error("acf: series has zero variance");
    return j == 0 ? 1.0 : autocov(x, j) / g0;
}

/// Gamma(j) = (1/n) sum_t (X_{t+j} - mu)(X_t - mu)'; Gamma(-j) = Gamma(j)'.
inline Matrix autocov_matrix(const MultiSeries& x, int lag) {
    const std::size_t j = static_cast<std::size_t>(std::abs(lag));
    const std::size_t n = x.rows();
    detail::require(j < n, "autocov_matrix: lag must be below n");
    const Matrix c = x.values().rowwise() - x.values().colwise().mean();
    const Eigen::Index pairs = static_cast<Eigen::Index>(n - j);
    Matrix g = c.middleRows(static_cast<Eigen::Index>(j), pairs).transpose() * c.topRows(pairs) /
               static_cast<double>(n);
    if (lag < 0) g.transposeInPlace();
    return g;
}

/// ceil(10 log10 n), capped at n - 2.
inline int default_max_lag(std::size_t n) {
    const int lag = static_cast<int>(std::ceil(10.0 * std::log10(static_cast<double>(n))));
    return std::clamp(lag, 1, static_cast<int>(n) - 2);
}

struct LagProfile {
    std::vector<int> lags;
    std::vector<Matrix> adcv;  // 1x1 for a univariate series
    std::vector<Matrix> adcf;
    std::optional<std::vector<double>> pairwise_band;
    std::optional<std::vector<double>> simultaneous_band;
};

/// ADCV and ADCF for lags 0..max_lag.
inline LagProfile lag_profile(const MultiSeries& x, int max_lag) {
    detail::require(max_lag >= 0 && static_cast<std::size_t>(max_lag) + 2 <= x.rows(),
                    "lag_profile: max lag must be at most n - 2");
    LagProfile out;
    out.lags.resize(static_cast<std::size_t>(max_lag) + 1);
    out.adcv.resize(out.lags.size());
    out.adcf.resize(out.lags.size());
    for (int j = 0; j <= max_lag; ++j) {
        out.lags[static_cast<std::size_t>(j)] = j;
        out.adcv[static_cast<std::size_t>(j)] = adcv_matrix(x, j);
    }
    const Vector v0 = out.adcv[0].diagonal();
    for (std::size_t k = 0; k < out.lags.size(); ++k) out.adcf[k] = adcf_from_adcv(out.adcv[k], v0);
    return out;
}

}  // namespace serialdep
