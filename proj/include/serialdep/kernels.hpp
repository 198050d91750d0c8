#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "serialdep/types.hpp"

namespace serialdep {

enum class KernelKind { bartlett, parzen, daniell };

/// Lag window k(z): symmetric, k(0) = 1, |k| <= 1, square integrable.
struct KernelSpec {
    KernelKind kind = KernelKind::bartlett;

    double operator()(double z) const {
        const double a = std::abs(z);
        switch (kind) {
            case KernelKind::bartlett:
                return a <= 1.0 ? 1.0 - a : 0.0;
            case KernelKind::parzen:
                if (a <= 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
                if (a <= 1.0) return 2.0 * (1.0 - a) * (1.0 - a) * (1.0 - a);
                return 0.0;
            case KernelKind::daniell: {
                if (a == 0.0) return 1.0;
                const double u = std::numbers::pi * a;
                return std::sin(u) / u;
            }
        }
        return 0.0;
    }

    /// True when k vanishes for |z| >= 1, so only lags below the bandwidth contribute.
    bool compact() const { return kind != KernelKind::daniell; }
};

inline double kernel_weight(const KernelSpec& spec, double z) { return spec(z); }

inline std::string_view kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::bartlett: return "bartlett";
        case KernelKind::parzen: return "parzen";
        case KernelKind::daniell: return "daniell";
    }
    return "unknown";
}

inline KernelSpec parse_kernel(std::string_view name) {
    if (name == "bartlett") return {KernelKind::bartlett};
    if (name == "parzen") return {KernelKind::parzen};
    if (name == "daniell") return {KernelKind::daniell};
    throw std::invalid_argument("unknown kernel: " + std::string(name));
}

/// Bandwidth p = ceil(c n^lambda). The ceiling reproduces the published bandwidth grid
/// (3 * 500^0.2 = 10.40 -> 11).
inline int resolve_bandwidth(double c, double lambda, std::size_t n) {
    detail::require(c > 0.0, "resolve_bandwidth: c must be positive");
    detail::require(lambda > 0.0 && lambda < 1.0, "resolve_bandwidth: lambda must lie in (0, 1)");
    detail::require(n >= 2, "resolve_bandwidth: need n >= 2");
    const double raw = c * std::pow(static_cast<double>(n), lambda);
    // Guard against values like 5.000000000001 produced by pow.
    const int p = std::max(1, static_cast<int>(std::ceil(raw - 1e-9)));
    if (static_cast<std::size_t>(p) >= n) {
        throw std::invalid_argument("resolve_bandwidth: bandwidth reaches the sample size");
    }
    return p;
}

}  // namespace serialdep
