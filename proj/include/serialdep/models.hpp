#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "serialdep/parallel.hpp"
#include "serialdep/types.hpp"

namespace serialdep {

enum class ModelKind { iid_normal, nma2, ar1, arch2 };

struct ModelSpec {
    ModelKind kind = ModelKind::iid_normal;
    std::size_t burn_in = 0;
    double phi = 0.4;     // ar1
    double omega = 0.5;   // arch2 intercept
    double a1 = 0.8;      // arch2 lag-1 coefficient
    double a2 = 0.1;      // arch2 lag-2 coefficient

    /// Spec with the default burn-in: 500 for ar1 and arch2, 2 for nma2, none for iid.
    static ModelSpec of(ModelKind kind) {
        ModelSpec s;
        s.kind = kind;
        switch (kind) {
            case ModelKind::iid_normal: s.burn_in = 0; break;
            case ModelKind::nma2: s.burn_in = 2; break;
            case ModelKind::ar1:
            case ModelKind::arch2: s.burn_in = 500; break;
        }
        return s;
    }
};

inline std::string_view model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::iid_normal: return "iid";
        case ModelKind::nma2: return "nma2";
        case ModelKind::ar1: return "ar1";
        case ModelKind::arch2: return "arch2";
    }
    return "?";
}

inline ModelKind parse_model(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "iid" || s == "iid-normal" || s == "iid_normal" || s == "normal") return ModelKind::iid_normal;
    if (s == "nma2") return ModelKind::nma2;
    if (s == "ar1") return ModelKind::ar1;
    if (s == "arch2") return ModelKind::arch2;
    throw std::invalid_argument("unknown model: " + std::string(text));
}

/// Simulates n observations after discarding burn_in; the recursion starts from a zero state.
inline std::vector<double> generate(const ModelSpec& model, std::size_t n, std::uint64_t seed) {
    detail::require(n >= 2, "generate: need n >= 2");
    Rng rng = make_stream(seed, {});
    std::normal_distribution<double> normal;
    const std::size_t total = n + model.burn_in;
    std::vector<double> x(total);
    double e1 = 0, e2 = 0;  // eps_{t-1}, eps_{t-2}
    double x1 = 0, x2 = 0;  // X_{t-1}, X_{t-2}
    for (std::size_t t = 0; t < total; ++t) {
        const double e = normal(rng);
        double v = 0;
        switch (model.kind) {
            case ModelKind::iid_normal: v = e; break;
            case ModelKind::nma2: v = e * e1 * e2; break;
            case ModelKind::ar1: v = model.phi * x1 + e; break;
            case ModelKind::arch2: v = std::sqrt(model.omega + model.a1 * x1 * x1 + model.a2 * x2 * x2) * e; break;
        }
        x[t] = v;
        e2 = e1;
        e1 = e;
        x2 = x1;
        x1 = v;
    }
    return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(model.burn_in), x.end());
}

}  // namespace serialdep
