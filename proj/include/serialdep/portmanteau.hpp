#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "serialdep/distance.hpp"
#include "serialdep/edf.hpp"
#include "serialdep/kernels.hpp"
#include "serialdep/lag_cache.hpp"
#include "serialdep/timeseries.hpp"
#include "serialdep/types.hpp"

namespace serialdep {

enum class StatisticKind { BP, LB, mLB, H96, T2n, T3n, H98, H99, ST, FP, FPm, STm, H98m, Feuerverger, nV2 };

struct TestStatistic {
    StatisticKind name;
    double value;
    int p;
    std::optional<KernelSpec> kernel;
};

inline std::string_view statistic_name(StatisticKind kind) {
    switch (kind) {
        case StatisticKind::BP: return "BP";
        case StatisticKind::LB: return "LB";
        case StatisticKind::mLB: return "mLB";
        case StatisticKind::H96: return "H96";
        case StatisticKind::T2n: return "T2n";
        case StatisticKind::T3n: return "T3n";
        case StatisticKind::H98: return "H98";
        case StatisticKind::H99: return "H99";
        case StatisticKind::ST: return "ST";
        case StatisticKind::FP: return "FP";
        case StatisticKind::FPm: return "FPm";
        case StatisticKind::STm: return "STm";
        case StatisticKind::H98m: return "H98m";
        case StatisticKind::Feuerverger: return "Feuerverger";
        case StatisticKind::nV2: return "nV2";
    }
    return "?";
}

inline StatisticKind parse_statistic(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto kind : {StatisticKind::BP, StatisticKind::LB, StatisticKind::mLB, StatisticKind::H96,
                      StatisticKind::T2n, StatisticKind::T3n, StatisticKind::H98, StatisticKind::H99,
                      StatisticKind::ST, StatisticKind::FP, StatisticKind::FPm, StatisticKind::STm,
                      StatisticKind::H98m, StatisticKind::Feuerverger, StatisticKind::nV2}) {
        std::string name(statistic_name(kind));
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (name == lower) return kind;
    }
    throw std::invalid_argument("unknown statistic: " + std::string(text));
}

inline bool is_multivariate(StatisticKind kind) {
    return kind == StatisticKind::mLB || kind == StatisticKind::FPm || kind == StatisticKind::STm ||
           kind == StatisticKind::H98m;
}

namespace detail {

inline void require_bandwidth(int p, std::size_t n, std::size_t slack, const char* what) {
    if (p < 1 || static_cast<std::size_t>(p) + slack > n) {
        throw std::invalid_argument(std::string(what) + ": bandwidth out of range");
    }
}

/// sum_{j=1}^{n-1} (n - j) k^2(j/p) term(j), skipping lags where the kernel vanishes.
template <class Term>
double kernel_lag_sum(std::size_t n, const KernelSpec& kernel, int p, Term&& term) {
    double total = 0;
    for (std::size_t j = 1; j < n; ++j) {
        const double z = static_cast<double>(j) / p;
        if (kernel.compact() && z >= 1.0) break;
        const double k = kernel(z);
        if (k == 0.0) continue;
        total += static_cast<double>(n - j) * k * k * term(j);
    }
    return total;
}

}  // namespace detail

// Correlation based statistics -------------------------------------------------

inline double stat_BP(SerialCache& c, int p) {
    detail::require_bandwidth(p, c.size(), 1, "stat_BP");
    double s = 0;
    for (int j = 1; j <= p; ++j) s += c.rho(static_cast<std::size_t>(j)) * c.rho(static_cast<std::size_t>(j));
    return static_cast<double>(c.size()) * s;
}

inline double stat_LB(SerialCache& c, int p) {
    detail::require_bandwidth(p, c.size(), 1, "stat_LB");
    const double n = static_cast<double>(c.size());
    double s = 0;
    for (int j = 1; j <= p; ++j) {
        const double r = c.rho(static_cast<std::size_t>(j));
        s += r * r / (n - j);
    }
    return n * (n + 2) * s;
}

/// n^2 sum_j trace{Gamma(j)' Gamma(0)^{-1} Gamma(j) Gamma(0)^{-1}} / (n - j).
inline double stat_mLB(MultiSerialCache& c, int p) {
    detail::require_bandwidth(p, c.size(), 1, "stat_mLB");
    const Matrix g0 = c.gamma(0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g0);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0) || eig.eigenvalues().minCoeff() < 1e-12 * top) {
        throw std::domain_error("stat_mLB: singular lag-0 autocovariance");
    }
    const Matrix inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                       eig.eigenvectors().transpose();
    const double n = static_cast<double>(c.size());
    double s = 0;
    for (int j = 1; j <= p; ++j) {
        const Matrix gj = c.gamma(static_cast<std::size_t>(j));
        s += (gj.transpose() * inv * gj * inv).trace() / (n - j);
    }
    return n * n * s;
}

/// Kernel spectral density estimate (1/2pi) sum_{|j|<n} k(j/p) rho(j) cos(j w).
inline double spectral_estimate(SerialCache& c, const KernelSpec& kernel, int p, double omega) {
    detail::require(std::abs(omega) <= std::numbers::pi + 1e-12, "spectral_estimate: |omega| must be <= pi");
    detail::require(p >= 1, "spectral_estimate: bandwidth must be positive");
    double s = 1.0;
    for (std::size_t j = 1; j < c.size(); ++j) {
        const double z = static_cast<double>(j) / p;
        if (kernel.compact() && z >= 1.0) break;
        const double k = kernel(z);
        if (k != 0.0) s += 2.0 * k * c.rho(j) * std::cos(static_cast<double>(j) * omega);
    }
    return s / (2.0 * std::numbers::pi);
}

/// n sum_{j=1}^{n-1} k^2(j/p) rho^2(j).
inline double stat_H96(SerialCache& c, const KernelSpec& kernel, int p) {
    detail::require_bandwidth(p, c.size(), 1, "stat_H96");
    double s = 0;
    for (std::size_t j = 1; j < c.size(); ++j) {
        const double z = static_cast<double>(j) / p;
        if (kernel.compact() && z >= 1.0) break;
        const double k = kernel(z);
        if (k != 0.0) s += k * k * c.rho(j) * c.rho(j);
    }
    return static_cast<double>(c.size()) * s;
}

namespace detail {

inline constexpr std::size_t kSpectralGrid = 1025;

template <class Integrand>
double trapezoid_over_circle(SerialCache& c, const KernelSpec& kernel, int p, Integrand&& f) {
    const double h = 2.0 * std::numbers::pi / static_cast<double>(kSpectralGrid - 1);
    double total = 0;
    for (std::size_t i = 0; i < kSpectralGrid; ++i) {
        const double omega = -std::numbers::pi + h * static_cast<double>(i);
        const double w = (i == 0 || i + 1 == kSpectralGrid) ? 0.5 : 1.0;
        total += w * f(spectral_estimate(c, kernel, p, omega));
    }
    return total * h;
}

}  // namespace detail

/// Hellinger-type distance between the kernel spectrum and the flat 1/2pi.
inline double stat_T2n(SerialCache& c, const KernelSpec& kernel, int p) {
    detail::require_bandwidth(p, c.size(), 1, "stat_T2n");
    const double root_f0 = std::sqrt(1.0 / (2.0 * std::numbers::pi));
    const double integral = detail::trapezoid_over_circle(c, kernel, p, [&](double f) {
        const double d = std::sqrt(std::max(f, 0.0)) - root_f0;
        return d * d;
    });
    return std::sqrt(std::max(integral, 0.0));
}

/// Kullback-Leibler type divergence over the frequencies where the estimate is positive.
inline double stat_T3n(SerialCache& c, const KernelSpec& kernel, int p) {
    detail::require_bandwidth(p, c.size(), 1, "stat_T3n");
    const double f0 = 1.0 / (2.0 * std::numbers::pi);
    return -detail::trapezoid_over_circle(c, kernel, p, [&](double f) {
        return f > 0.0 ? std::log(f / f0) * f0 : 0.0;
    });
}

// Distribution function based statistics -----------------------------------------

inline double dist_D1(std::span<const double> x, int lag) {
    const std::size_t j = detail::checked_lag(x.size(), lag, 2);
    const std::size_t pairs = x.size() - j;
    return detail::ks_distance(x.subspan(0, pairs), x.subspan(j, pairs));
}

inline double dist_D2(std::span<const double> x, int lag) {
    const std::size_t j = detail::checked_lag(x.size(), lag, 2);
    const std::size_t pairs = x.size() - j;
    return detail::cvm_distance(x.subspan(0, pairs), x.subspan(j, pairs));
}

/// sum_{j=1}^{p} D_2(j).
inline double stat_ST(SerialCache& c, int p) {
    detail::require_bandwidth(p, c.size(), 2, "stat_ST");
    double s = 0;
    for (int j = 1; j <= p; ++j) s += c.cvm(static_cast<std::size_t>(j));
    return s;
}

/// sum_j (n - j) k^2(j/p) D_2(j)^2, with D_2 squared once more as in the published form.
inline double stat_H98(SerialCache& c, const KernelSpec& kernel, int p) {
    detail::require_bandwidth(p, c.size(), 2, "stat_H98");
    return detail::kernel_lag_sum(c.size(), kernel, p, [&](std::size_t j) {
        const double d = c.cvm(j);
        return d * d;
    });
}

// Characteristic function based statistics ---------------------------------------

inline double gaussian_weighted_sigma2(std::span<const double> x, int lag) {
    const std::size_t j = detail::checked_lag(x.size(), lag, 2);
    SerialCache c(x);
    return c.gauss2(j);
}

inline double stat_H99(SerialCache& c, const KernelSpec& kernel, int p) {
    detail::require_bandwidth(p, c.size(), 2, "stat_H99");
    return detail::kernel_lag_sum(c.size(), kernel, p, [&](std::size_t j) { return c.gauss2(j); });
}

inline double stat_FP(SerialCache& c, const KernelSpec& kernel, int p) {
    detail::require_bandwidth(p, c.size(), 2, "stat_FP");
    return detail::kernel_lag_sum(c.size(), kernel, p, [&](std::size_t j) { return c.dcov2(j); });
}

/// Component double-sum form sum_{r,m} sum_j (n - j) k^2(j/p) V^2_rm(j).
inline double stat_FP_multivariate(MultiSerialCache& c, const KernelSpec& kernel, int p) {
    detail::require_bandwidth(p, c.size(), 2, "stat_FP_multivariate");
    double total = 0;
    for (std::size_t r = 0; r < c.dim(); ++r) {
        for (std::size_t m = 0; m < c.dim(); ++m) {
            total += detail::kernel_lag_sum(c.size(), kernel, p, [&](std::size_t j) { return c.dcov2(r, m, j); });
        }
    }
    return total;
}

/// Trace form sum_j (n - j) k^2(j/p) trace{V(j)* V(j)}, V(j) holding the square roots.
inline double stat_FP_multivariate_trace(MultiSerialCache& c, const KernelSpec& kernel, int p) {
    detail::require_bandwidth(p, c.size(), 2, "stat_FP_multivariate");
    return detail::kernel_lag_sum(c.size(), kernel, p, [&](std::size_t j) {
        Matrix v(c.dim(), c.dim());
        for (std::size_t r = 0; r < c.dim(); ++r) {
            for (std::size_t m = 0; m < c.dim(); ++m) v(r, m) = std::sqrt(c.dcov2(r, m, j));
        }
        return (v.transpose() * v).trace();
    });
}

inline double stat_ST_multivariate(MultiSerialCache& c, int p) {
    detail::require_bandwidth(p, c.size(), 2, "stat_ST_multivariate");
    double s = 0;
    for (std::size_t r = 0; r < c.dim(); ++r) {
        for (std::size_t m = 0; m < c.dim(); ++m) {
            for (int j = 1; j <= p; ++j) s += c.cvm(r, m, static_cast<std::size_t>(j));
        }
    }
    return s;
}

inline double stat_H98_multivariate(MultiSerialCache& c, const KernelSpec& kernel, int p) {
    detail::require_bandwidth(p, c.size(), 2, "stat_H98_multivariate");
    double total = 0;
    for (std::size_t r = 0; r < c.dim(); ++r) {
        for (std::size_t m = 0; m < c.dim(); ++m) {
            total += detail::kernel_lag_sum(c.size(), kernel, p, [&](std::size_t j) {
                const double d = c.cvm(r, m, j);
                return d * d;
            });
        }
    }
    return total;
}

// Convenience overloads on raw series ----------------------------------------------

#define SERIALDEP_SERIES_OVERLOAD_P(name)                      \
    inline double name(std::span<const double> x, int p) {     \
        SerialCache c(x);                                      \
        return name(c, p);                                     \
    }
#define SERIALDEP_SERIES_OVERLOAD_KP(name)                                                \
    inline double name(std::span<const double> x, const KernelSpec& kernel, int p) {     \
        SerialCache c(x);                                                                 \
        return name(c, kernel, p);                                                        \
    }
#define SERIALDEP_MULTI_OVERLOAD_P(name)                      \
    inline double name(const MultiSeries& x, int p) {         \
        MultiSerialCache c(x);                                \
        return name(c, p);                                    \
    }
#define SERIALDEP_MULTI_OVERLOAD_KP(name)                                             \
    inline double name(const MultiSeries& x, const KernelSpec& kernel, int p) {      \
        MultiSerialCache c(x);                                                        \
        return name(c, kernel, p);                                                    \
    }

SERIALDEP_SERIES_OVERLOAD_P(stat_BP)
SERIALDEP_SERIES_OVERLOAD_P(stat_LB)
SERIALDEP_SERIES_OVERLOAD_P(stat_ST)
SERIALDEP_SERIES_OVERLOAD_KP(stat_H96)
SERIALDEP_SERIES_OVERLOAD_KP(stat_T2n)
SERIALDEP_SERIES_OVERLOAD_KP(stat_T3n)
SERIALDEP_SERIES_OVERLOAD_KP(stat_H98)
SERIALDEP_SERIES_OVERLOAD_KP(stat_H99)
SERIALDEP_SERIES_OVERLOAD_KP(stat_FP)
SERIALDEP_MULTI_OVERLOAD_P(stat_mLB)
SERIALDEP_MULTI_OVERLOAD_P(stat_ST_multivariate)
SERIALDEP_MULTI_OVERLOAD_KP(stat_FP_multivariate)
SERIALDEP_MULTI_OVERLOAD_KP(stat_FP_multivariate_trace)
SERIALDEP_MULTI_OVERLOAD_KP(stat_H98_multivariate)

#undef SERIALDEP_SERIES_OVERLOAD_P
#undef SERIALDEP_SERIES_OVERLOAD_KP
#undef SERIALDEP_MULTI_OVERLOAD_P
#undef SERIALDEP_MULTI_OVERLOAD_KP

inline double spectral_estimate(std::span<const double> x, const KernelSpec& kernel, int p, double omega) {
    SerialCache c(x);
    return spectral_estimate(c, kernel, p, omega);
}

/// Univariate statistic by name. Correlation based statistics throw std::domain_error on a
/// constant series; the others are 0 there.
inline double evaluate(StatisticKind kind, SerialCache& c, const KernelSpec& kernel, int p) {
    switch (kind) {
        case StatisticKind::BP: return stat_BP(c, p);
        case StatisticKind::LB: return stat_LB(c, p);
        case StatisticKind::H96: return stat_H96(c, kernel, p);
        case StatisticKind::T2n: return stat_T2n(c, kernel, p);
        case StatisticKind::T3n: return stat_T3n(c, kernel, p);
        case StatisticKind::H98: return stat_H98(c, kernel, p);
        case StatisticKind::H99: return stat_H99(c, kernel, p);
        case StatisticKind::ST: return stat_ST(c, p);
        case StatisticKind::FP: return stat_FP(c, kernel, p);
        default:
            break;
    }
    throw std::invalid_argument("statistic " + std::string(statistic_name(kind)) +
                                " is not a univariate serial statistic");
}

inline double evaluate(StatisticKind kind, MultiSerialCache& c, const KernelSpec& kernel, int p) {
    switch (kind) {
        case StatisticKind::mLB: return stat_mLB(c, p);
        case StatisticKind::FPm: return stat_FP_multivariate(c, kernel, p);
        case StatisticKind::STm: return stat_ST_multivariate(c, p);
        case StatisticKind::H98m: return stat_H98_multivariate(c, kernel, p);
        default:
            break;
    }
    throw std::invalid_argument("statistic " + std::string(statistic_name(kind)) +
                                " is not a multivariate serial statistic");
}

}  // namespace serialdep
