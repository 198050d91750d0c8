#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "serialdep/distance.hpp"
#include "serialdep/fast_dcov.hpp"
#include "serialdep/parallel.hpp"
#include "serialdep/portmanteau.hpp"
#include "serialdep/timeseries.hpp"
#include "serialdep/types.hpp"

namespace serialdep {

enum class ResamplingMethod { permutation, iid_bootstrap, wild_bootstrap, subsampling };
enum class Multiplier { normal, rademacher };

struct ResamplingPlan {
    ResamplingMethod method = ResamplingMethod::iid_bootstrap;
    std::size_t B = 299;
    std::uint64_t seed = 0;
    std::optional<std::size_t> block;
    Multiplier multiplier = Multiplier::normal;

    void validate() const {
        detail::require(B >= 1, "resampling plan: B must be at least 1");
        if (method == ResamplingMethod::subsampling && block) {
            detail::require(*block >= 2, "resampling plan: block length must be at least 2");
        }
        if (method != ResamplingMethod::subsampling) {
            detail::require(!block.has_value(), "resampling plan: a block length needs subsampling");
        }
    }
};

struct TestResult {
    TestStatistic statistic;
    double p_value;
    std::size_t B_used;
    std::optional<double> critical_value;
    std::uint64_t seed;
};

/// (1 + #{replicates >= observed}) / (B + 1).
inline double pvalue_from_replicates(double observed, std::span<const double> replicates) {
    detail::require(!replicates.empty(), "p-value: need at least one replicate");
    std::size_t exceed = 0;
    for (double r : replicates) exceed += r >= observed ? 1 : 0;
    return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(replicates.size()) + 1.0);
}

/// Empirical quantile sorted[ceil(level * B) - 1].
inline double empirical_quantile(std::vector<double> values, double level) {
    detail::require(!values.empty(), "quantile: no values");
    detail::require(level > 0.0 && level <= 1.0, "quantile: level must lie in (0, 1]");
    const double pos = std::ceil(level * static_cast<double>(values.size()) - 1e-9);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(pos, 1.0)) - 1, 0,
                                                  values.size() - 1);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
    return values[k];
}

// Permutation test -----------------------------------------------------------------

/// Monte-Carlo permutation test of independence based on n V^2.
inline TestResult permutation_pvalue(const Sample& x, const Sample& y, std::size_t B, std::uint64_t seed,
                                     std::optional<double> alpha = std::nullopt) {
    detail::require(B >= 1, "permutation_pvalue: B must be at least 1");
    detail::require(x.rows() == y.rows(), "permutation_pvalue: samples need equal size");
    const std::size_t n = x.rows();
    const double nn = static_cast<double>(n);
    std::vector<double> reps(B);
    double observed = 0;

    auto permutation = [&](std::size_t b) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng = make_stream(seed, {b});
        std::shuffle(perm.begin(), perm.end(), rng);
        return perm;
    };

    if (x.dim() == 1 && y.dim() == 1) {
        const Matrix& xv = x.values();
        const Matrix& yv = y.values();
        std::vector<double> xs(xv.data(), xv.data() + n), ys(yv.data(), yv.data() + n);
        observed = nn * dcov_fast_univariate(xs, ys).v2;
        parallel_for(B, [&](std::size_t b) {
            const auto perm = permutation(b);
            std::vector<double> yp(n);
            for (std::size_t i = 0; i < n; ++i) yp[i] = ys[perm[i]];
            reps[b] = nn * dcov_fast_univariate(xs, yp).v2;
        });
    } else {
        // With A double-centred, sum A_ij b_{pi(i) pi(j)} needs only the raw b.
        const Matrix a = double_center(pairwise_distances(x));
        const Matrix braw = pairwise_distances(y);
        observed = nn * std::max(0.0, a.cwiseProduct(braw).sum() / (nn * nn));
        parallel_for(B, [&](std::size_t b) {
            const auto perm = permutation(b);
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const auto pj = static_cast<Eigen::Index>(perm[j]);
                for (std::size_t i = 0; i < n; ++i) {
                    s += a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                         braw(static_cast<Eigen::Index>(perm[i]), pj);
                }
            }
            reps[b] = nn * std::max(0.0, s / (nn * nn));
        });
    }
    TestResult out{{StatisticKind::nV2, observed, 0, std::nullopt}, pvalue_from_replicates(observed, reps), B,
                   std::nullopt, seed};
    if (alpha) out.critical_value = empirical_quantile(reps, 1.0 - *alpha);
    return out;
}

// Ordinary bootstrap under the i.i.d. null --------------------------------------------

inline std::vector<double> resample_rows(std::span<const double> x, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<double> out(x.size());
    for (double& v : out) v = x[pick(rng)];
    return out;
}

inline MultiSeries resample_rows(const MultiSeries& x, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, x.rows() - 1);
    Matrix out(x.values().rows(), x.values().cols());
    for (Eigen::Index t = 0; t < out.rows(); ++t) {
        out.row(t) = x.values().row(static_cast<Eigen::Index>(pick(rng)));
    }
    return MultiSeries(std::move(out), x.labels());
}

/// Replicate matrix (B x k) of a vector-valued statistic on i.i.d. resamples; row b comes
/// from stream (seed, b).
template <class Data, class Fn>
Matrix bootstrap_replicates(const Data& x, std::size_t B, std::uint64_t seed, std::size_t width, Fn&& fn) {
    detail::require(B >= 1, "bootstrap: B must be at least 1");
    Matrix reps(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(width));
    parallel_for(B, [&](std::size_t b) {
        Rng rng = make_stream(seed, {b});
        const auto resampled = resample_rows(x, rng);
        const std::vector<double> values = fn(resampled);
        if (values.size() != width) throw std::logic_error("bootstrap: statistic width changed");
        for (std::size_t k = 0; k < width; ++k) {
            reps(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(k)) = values[k];
        }
    });
    return reps;
}

inline TestResult finish_test(TestStatistic statistic, const std::vector<double>& reps, std::uint64_t seed,
                              std::optional<double> alpha) {
    TestResult out{statistic, pvalue_from_replicates(statistic.value, reps), reps.size(), std::nullopt, seed};
    if (alpha) out.critical_value = empirical_quantile(reps, 1.0 - *alpha);
    return out;
}

/// Bootstrap p-value for a univariate serial statistic.
inline TestResult iid_bootstrap_pvalue(StatisticKind kind, std::span<const double> x, const KernelSpec& kernel,
                                       int p, const ResamplingPlan& plan,
                                       std::optional<double> alpha = std::nullopt) {
    plan.validate();
    SerialCache cache(x);
    const double observed = evaluate(kind, cache, kernel, p);
    const Matrix reps = bootstrap_replicates(x, plan.B, plan.seed, 1, [&](const std::vector<double>& r) {
        SerialCache c(r);
        return std::vector<double>{evaluate(kind, c, kernel, p)};
    });
    std::vector<double> col(reps.data(), reps.data() + reps.rows());
    return finish_test({kind, observed, p, kernel}, col, plan.seed, alpha);
}

/// Bootstrap p-value for a multivariate serial statistic.
inline TestResult iid_bootstrap_pvalue(StatisticKind kind, const MultiSeries& x, const KernelSpec& kernel, int p,
                                       const ResamplingPlan& plan, std::optional<double> alpha = std::nullopt) {
    plan.validate();
    MultiSerialCache cache(x);
    const double observed = evaluate(kind, cache, kernel, p);
    const Matrix reps = bootstrap_replicates(x, plan.B, plan.seed, 1, [&](const MultiSeries& r) {
        MultiSerialCache c(r);
        return std::vector<double>{evaluate(kind, c, kernel, p)};
    });
    std::vector<double> col(reps.data(), reps.data() + reps.rows());
    return finish_test({kind, observed, p, kernel}, col, plan.seed, alpha);
}

/// Bootstrap p-value for an arbitrary scalar statistic of the series.
inline TestResult iid_bootstrap_pvalue(const std::function<double(std::span<const double>)>& stat_fn,
                                       StatisticKind label, std::span<const double> x, const ResamplingPlan& plan,
                                       std::optional<double> alpha = std::nullopt) {
    plan.validate();
    const double observed = stat_fn(x);
    const Matrix reps = bootstrap_replicates(x, plan.B, plan.seed, 1, [&](const std::vector<double>& r) {
        return std::vector<double>{stat_fn(r)};
    });
    std::vector<double> col(reps.data(), reps.data() + reps.rows());
    return finish_test({label, observed, 0, std::nullopt}, col, plan.seed, alpha);
}

// Wild bootstrap -----------------------------------------------------------------------

namespace detail {

/// n x B multiplier matrix; column b is drawn from stream (seed, b).
inline Matrix multipliers(std::size_t n, std::size_t B, std::uint64_t seed, Multiplier kind) {
    Matrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(B));
    for (std::size_t b = 0; b < B; ++b) {
        Rng rng = make_stream(seed, {b});
        std::normal_distribution<double> normal;
        std::bernoulli_distribution coin;
        for (std::size_t t = 0; t < n; ++t) {
            w(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(b)) =
                kind == Multiplier::normal ? normal(rng) : (coin(rng) ? 1.0 : -1.0);
        }
    }
    return w;
}

inline Matrix centered_distances(std::span<const double> x) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Matrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) d(i, k) = std::abs(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(k)]);
    }
    return double_center(d);
}

/// Replicates (1/N^2) W' (A o B) W over the lag-j pairs, one per multiplier column.
inline std::vector<double> wild_quadratic_forms(std::span<const double> lead, std::span<const double> lagged,
                                                const Matrix& w) {
    const std::size_t pairs = lead.size();
    const Matrix m = centered_distances(lead).cwiseProduct(centered_distances(lagged));
    const auto top = w.topRows(static_cast<Eigen::Index>(pairs));
    const Matrix mw = m * top;
    std::vector<double> out(static_cast<std::size_t>(w.cols()));
    const double scale = static_cast<double>(pairs) * static_cast<double>(pairs);
    for (Eigen::Index b = 0; b < w.cols(); ++b) out[static_cast<std::size_t>(b)] = top.col(b).dot(mw.col(b)) / scale;
    return out;
}

inline std::vector<int> positive_lags(const std::vector<int>& lags, std::size_t n) {
    std::vector<int> out;
    for (int j : lags) {
        const std::size_t a = checked_lag(n, j, 2);
        if (a >= 1) out.push_back(static_cast<int>(a));
    }
    return out;
}

}  // namespace detail

/// Simultaneous ADCF band: the level-quantile over replicates of max_j sqrt(V*^2(j) / V^2(0)).
/// The returned vector repeats the band once per requested lag.
inline std::vector<double> wild_bootstrap_band(std::span<const double> x, const std::vector<int>& lags,
                                               std::size_t B, std::uint64_t seed, double level,
                                               Multiplier multiplier = Multiplier::normal) {
    detail::require(B >= 1, "wild_bootstrap_band: B must be at least 1");
    detail::require(level > 0.0 && level < 1.0, "wild_bootstrap_band: level must lie in (0, 1)");
    detail::require(x.size() >= 3, "wild_bootstrap_band: need at least 3 observations");
    const auto active = detail::positive_lags(lags, x.size());
    const double v0 = adcv(x, 0);
    if (active.empty() || !(v0 > 0.0)) return std::vector<double>(lags.size(), 0.0);
    const Matrix w = detail::multipliers(x.size(), B, seed, multiplier);
    std::vector<std::vector<double>> per_lag(active.size());
    parallel_for(active.size(), [&](std::size_t k) {
        const std::size_t j = static_cast<std::size_t>(active[k]);
        const std::size_t pairs = x.size() - j;
        per_lag[k] = detail::wild_quadratic_forms(x.subspan(0, pairs), x.subspan(j, pairs), w);
    });
    std::vector<double> maxima(B, 0.0);
    for (const auto& q : per_lag) {
        for (std::size_t b = 0; b < B; ++b) maxima[b] = std::max(maxima[b], std::sqrt(std::max(0.0, q[b]) / v0));
    }
    return std::vector<double>(lags.size(), empirical_quantile(maxima, level));
}

inline std::vector<double> wild_bootstrap_band(std::span<const double> x, int max_lag, std::size_t B,
                                               std::uint64_t seed, double level,
                                               Multiplier multiplier = Multiplier::normal) {
    detail::require(max_lag >= 1, "wild_bootstrap_band: max lag must be at least 1");
    std::vector<int> lags(static_cast<std::size_t>(max_lag));
    std::iota(lags.begin(), lags.end(), 1);
    return wild_bootstrap_band(x, lags, B, seed, level, multiplier);
}

/// Multivariate simultaneous band: maximum over components (r, m) and lags of the
/// replicate pairwise ADCF sqrt(V*^2_rm(j) / sqrt(V_rr(0) V_mm(0))).
inline std::vector<double> wild_bootstrap_band(const MultiSeries& x, const std::vector<int>& lags, std::size_t B,
                                               std::uint64_t seed, double level,
                                               Multiplier multiplier = Multiplier::normal) {
    detail::require(B >= 1, "wild_bootstrap_band: B must be at least 1");
    detail::require(level > 0.0 && level < 1.0, "wild_bootstrap_band: level must lie in (0, 1)");
    detail::require(x.rows() >= 3, "wild_bootstrap_band: need at least 3 observations");
    const auto active = detail::positive_lags(lags, x.rows());
    const std::size_t d = x.dim();
    std::vector<double> v0(d);
    for (std::size_t r = 0; r < d; ++r) v0[r] = adcv(x.component(r), 0);
    if (active.empty()) return std::vector<double>(lags.size(), 0.0);
    const Matrix w = detail::multipliers(x.rows(), B, seed, multiplier);
    const std::size_t cells = active.size() * d * d;
    std::vector<std::vector<double>> forms(cells);
    parallel_for(cells, [&](std::size_t c) {
        const std::size_t k = c / (d * d);
        const std::size_t r = (c / d) % d;
        const std::size_t m = c % d;
        const double denom = std::sqrt(v0[r] * v0[m]);
        if (!(denom > 0.0)) {
            forms[c].assign(B, 0.0);
            return;
        }
        const std::size_t j = static_cast<std::size_t>(active[k]);
        const std::size_t pairs = x.rows() - j;
        auto q = detail::wild_quadratic_forms(x.component(r).subspan(0, pairs), x.component(m).subspan(j, pairs), w);
        for (double& v : q) v = std::sqrt(std::max(0.0, v) / denom);
        forms[c] = std::move(q);
    });
    std::vector<double> maxima(B, 0.0);
    for (const auto& q : forms) {
        for (std::size_t b = 0; b < B; ++b) maxima[b] = std::max(maxima[b], q[b]);
    }
    return std::vector<double>(lags.size(), empirical_quantile(maxima, level));
}

// Subsampling ------------------------------------------------------------------------

/// Pairwise critical value for V^2 between lead_t and lagged_{t+j}, in the units of the
/// full-sample statistic: the level-quantile of (b / N) V^2_block over the N - b + 1 blocks
/// of b consecutive lag-j pairs.
inline double subsample_band(std::span<const double> lead, std::span<const double> lagged, int lag,
                             std::size_t block, double level) {
    detail::require(lead.size() == lagged.size(), "subsample_band: series need equal length");
    const std::size_t j = detail::checked_lag(lead.size(), lag, 2);
    const std::size_t pairs = lead.size() - j;
    detail::require(block >= 2 && block <= pairs, "subsample_band: block must lie in [2, n - lag]");
    detail::require(level > 0.0 && level < 1.0, "subsample_band: level must lie in (0, 1)");
    const std::size_t blocks = pairs - block + 1;
    const double scale = static_cast<double>(block) / static_cast<double>(pairs);
    std::vector<double> stats(blocks);
    parallel_for(blocks, [&](std::size_t s) {
        stats[s] = scale * dcov_fast_univariate(lead.subspan(s, block), lagged.subspan(s + j, block)).v2;
    });
    return empirical_quantile(std::move(stats), level);
}

inline double subsample_band(std::span<const double> x, int lag, std::size_t block, double level) {
    return subsample_band(x, x, lag, block, level);
}

/// The subsampling critical value mapped to the ADCF scale, sqrt(cv / V^2(0)).
inline double subsample_adcf_band(std::span<const double> x, int lag, std::size_t block, double level) {
    const double v0 = adcv(x, 0);
    if (!(v0 > 0.0)) return 0.0;
    return std::sqrt(std::clamp(subsample_band(x, lag, block, level) / v0, 0.0, 1.0));
}

/// Index minimising the local standard deviation of values over a centred window
/// (truncated at the ends); ties go to the lowest index.
inline std::size_t min_volatility_select(std::span<const double> values, std::size_t window = 3) {
    detail::require(values.size() >= 3, "min_volatility: need at least 3 candidates");
    detail::require(window >= 2, "min_volatility: window must be at least 2");
    const std::size_t half = window / 2;
    std::size_t best = 0;
    double best_sd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(values.size() - 1, i + (window - 1 - half));
        const double count = static_cast<double>(hi - lo + 1);
        double mean = 0;
        for (std::size_t k = lo; k <= hi; ++k) mean += values[k];
        mean /= count;
        double ss = 0;
        for (std::size_t k = lo; k <= hi; ++k) ss += (values[k] - mean) * (values[k] - mean);
        const double sd = std::sqrt(ss / count);
        if (sd < best_sd) {
            best_sd = sd;
            best = i;
        }
    }
    return best;
}

/// Unique round(N^e), e = 0.30, 0.35, ..., 0.70, kept within [2, N].
inline std::vector<std::size_t> default_block_candidates(std::size_t pairs) {
    std::vector<std::size_t> out;
    for (int k = 0; k <= 8; ++k) {
        const double e = 0.30 + 0.05 * k;
        const auto b = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(pairs), e)));
        if (b >= 2 && b <= pairs && (out.empty() || out.back() != b)) out.push_back(b);
    }
    return out;
}

inline std::size_t min_volatility_block(std::span<const double> x, int lag, std::vector<std::size_t> candidates,
                                        std::size_t window = 3, double level = 0.95) {
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    detail::require(candidates.size() >= 3, "min_volatility_block: need at least 3 candidate blocks");
    std::vector<double> bands(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) bands[k] = subsample_band(x, lag, candidates[k], level);
    return candidates[min_volatility_select(bands, window)];
}

/// Block length by minimum volatility over the default candidates for this lag.
inline std::size_t min_volatility_block(std::span<const double> x, int lag) {
    const std::size_t j = detail::checked_lag(x.size(), lag, 2);
    return min_volatility_block(x, lag, default_block_candidates(x.size() - j));
}

}  // namespace serialdep
