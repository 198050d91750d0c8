#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "serialdep/edf.hpp"
#include "serialdep/fast_dcov.hpp"
#include "serialdep/types.hpp"

namespace serialdep {

/// Per-lag dependence measures of one univariate series, computed on first use and
/// memoized. Every portmanteau statistic is a weighted sum of these, so evaluating several
/// statistics (or several bandwidths) on one series shares the work.
/// Not safe for concurrent use; give each thread its own cache.
class SerialCache {
   public:
    explicit SerialCache(std::span<const double> x) : x_(x.begin(), x.end()) {
        detail::require(x_.size() >= 2, "SerialCache: need at least 2 observations");
        detail::require_finite(x_, "SerialCache");
        const std::size_t n = x_.size();
        rho_.assign(n, kUnset);
        dcov_.assign(n, kUnset);
        gauss_.assign(n, kUnset);
        cvm_.assign(n, kUnset);
        double mean = 0;
        for (double v : x_) mean += v;
        mean_ = mean / static_cast<double>(n);
        double g0 = 0;
        for (double v : x_) g0 += (v - mean_) * (v - mean_);
        gamma0_ = g0 / static_cast<double>(n);
    }

    std::size_t size() const { return x_.size(); }
    std::span<const double> values() const { return x_; }
    bool degenerate() const { return !(gamma0_ > 0.0); }

    /// Sample autocorrelation; throws on a zero-variance series.
    double rho(std::size_t j) {
        if (degenerate()) throw std::domain_error("autocorrelation undefined for a constant series");
        if (j == 0) return 1.0;
        check(j);
        double& slot = rho_[j];
        if (std::isnan(slot)) {
            double s = 0;
            for (std::size_t t = 0; t + j < x_.size(); ++t) s += (x_[t] - mean_) * (x_[t + j] - mean_);
            slot = s / static_cast<double>(x_.size()) / gamma0_;
        }
        return slot;
    }

    /// Squared auto-distance covariance V^2(j); a single pair gives 0.
    double dcov2(std::size_t j) {
        check(j);
        double& slot = dcov_[j];
        if (std::isnan(slot)) {
            const std::size_t pairs = x_.size() - j;
            const std::span<const double> x(x_);
            slot = pairs < 2 ? 0.0 : dcov_fast_univariate(x.subspan(0, pairs), x.subspan(j, pairs)).v2;
        }
        return slot;
    }

    /// Gaussian-weighted integral of |sigma_j(u, v)|^2 phi(u) phi(v): the double-centred
    /// inner product of G_ts = exp(-(X_t - X_s)^2 / 2) over the lag-j pairs.
    double gauss2(std::size_t j) {
        check(j);
        double& slot = gauss_[j];
        if (std::isnan(slot)) slot = compute_gauss2(j);
        return slot;
    }

    /// Cramer-von Mises distance D_2(j) between (X_t, X_{t+j}).
    double cvm(std::size_t j) {
        check(j);
        double& slot = cvm_[j];
        if (std::isnan(slot)) {
            const std::size_t pairs = x_.size() - j;
            const std::span<const double> x(x_);
            slot = detail::cvm_distance(x.subspan(0, pairs), x.subspan(j, pairs));
        }
        return slot;
    }

   private:
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

    void check(std::size_t j) const {
        if (j >= x_.size()) throw std::invalid_argument("lag must be below the series length");
    }

    void build_gauss() {
        const std::size_t n = x_.size();
        gauss_matrix_.assign(n * n, 1.0);
        prefix_.assign(n * (n + 1), 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t s = t + 1; s < n; ++s) {
                const double d = x_[t] - x_[s];
                const double g = std::exp(-0.5 * d * d);
                gauss_matrix_[t * n + s] = g;
                gauss_matrix_[s * n + t] = g;
            }
        }
        for (std::size_t t = 0; t < n; ++t) {
            double* row = &prefix_[t * (n + 1)];
            const double* g = &gauss_matrix_[t * n];
            for (std::size_t s = 0; s < n; ++s) row[s + 1] = row[s] + g[s];
        }
    }

    double compute_gauss2(std::size_t j) {
        const std::size_t n = x_.size();
        const std::size_t pairs = n - j;
        if (pairs < 2) return 0.0;
        if (gauss_matrix_.empty()) build_gauss();
        const double np = static_cast<double>(pairs);
        std::vector<double> ra(pairs), rb(pairs);
        double ga = 0, gb = 0;
        for (std::size_t t = 0; t < pairs; ++t) {
            const double* pa = &prefix_[t * (n + 1)];
            const double* pb = &prefix_[(t + j) * (n + 1)];
            ra[t] = pa[pairs] / np;
            rb[t] = (pb[n] - pb[j]) / np;
            ga += ra[t];
            gb += rb[t];
        }
        ga /= np;
        gb /= np;
        double diag = 0, off = 0;
        for (std::size_t t = 0; t < pairs; ++t) {
            const double* ga_row = &gauss_matrix_[t * n];
            const double* gb_row = &gauss_matrix_[(t + j) * n + j];
            const double at = ga - ra[t];
            const double bt = gb - rb[t];
            diag += (1.0 + at - ra[t]) * (1.0 + bt - rb[t]);
            double acc = 0;
            for (std::size_t s = t + 1; s < pairs; ++s) {
                acc += (ga_row[s] + at - ra[s]) * (gb_row[s] + bt - rb[s]);
            }
            off += acc;
        }
        return std::max(0.0, (diag + 2.0 * off) / (np * np));
    }

    std::vector<double> x_;
    double mean_ = 0.0;
    double gamma0_ = 0.0;
    std::vector<double> rho_, dcov_, gauss_, cvm_;
    std::vector<double> gauss_matrix_;
    std::vector<double> prefix_;
};

/// Multivariate counterpart: pairwise V^2_rm(j), D_2^{(r,m)}(j) and Gamma(j).
class MultiSerialCache {
   public:
    explicit MultiSerialCache(MultiSeries x) : x_(std::move(x)) {
        const std::size_t cells = x_.rows() * x_.dim() * x_.dim();
        dcov_.assign(cells, kUnset);
        cvm_.assign(cells, kUnset);
    }

    const MultiSeries& series() const { return x_; }
    std::size_t size() const { return x_.rows(); }
    std::size_t dim() const { return x_.dim(); }

    double dcov2(std::size_t r, std::size_t m, std::size_t j) {
        double& slot = dcov_[index(r, m, j)];
        if (std::isnan(slot)) {
            const std::size_t pairs = x_.rows() - j;
            slot = pairs < 2 ? 0.0
                             : dcov_fast_univariate(x_.component(r).subspan(0, pairs),
                                                    x_.component(m).subspan(j, pairs))
                                   .v2;
        }
        return slot;
    }

    double cvm(std::size_t r, std::size_t m, std::size_t j) {
        double& slot = cvm_[index(r, m, j)];
        if (std::isnan(slot)) {
            const std::size_t pairs = x_.rows() - j;
            slot = detail::cvm_distance(x_.component(r).subspan(0, pairs), x_.component(m).subspan(j, pairs));
        }
        return slot;
    }

    /// Gamma(j) = (1/n) sum_t (X_{t+j} - mu)(X_t - mu)'.
    Matrix gamma(std::size_t j) {
        if (centered_.size() == 0) centered_ = x_.values().rowwise() - x_.values().colwise().mean();
        const Eigen::Index pairs = static_cast<Eigen::Index>(x_.rows() - j);
        return centered_.middleRows(static_cast<Eigen::Index>(j), pairs).transpose() *
               centered_.topRows(pairs) / static_cast<double>(x_.rows());
    }

   private:
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

    std::size_t index(std::size_t r, std::size_t m, std::size_t j) const {
        if (j >= x_.rows() || r >= x_.dim() || m >= x_.dim()) {
            throw std::invalid_argument("MultiSerialCache: index out of range");
        }
        return (j * x_.dim() + r) * x_.dim() + m;
    }

    MultiSeries x_;
    std::vector<double> dcov_, cvm_;
    Matrix centered_;
};

}  // namespace serialdep
