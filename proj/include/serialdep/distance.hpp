#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "serialdep/fast_dcov.hpp"
#include "serialdep/types.hpp"

namespace serialdep {

enum class MetricKind { euclidean, alpha_power, gaussian_induced, hsic_kernel_induced };

/// How pairwise "distances" between observations are formed.
class MetricSpec {
   public:
    static MetricSpec euclidean() { return MetricSpec(MetricKind::euclidean, 1.0); }

    /// |x - y|^alpha, alpha strictly inside (0, 2).
    static MetricSpec alpha_power(double alpha) {
        detail::require(alpha > 0.0 && alpha < 2.0, "MetricSpec: alpha must lie in (0, 2)");
        return MetricSpec(MetricKind::alpha_power, alpha);
    }

    /// 1 - exp(-|x - y|^2 / (2 sigma^2)), the distance a Gaussian weight function induces.
    static MetricSpec gaussian_induced(double sigma) {
        detail::require(sigma > 0.0 && std::isfinite(sigma), "MetricSpec: sigma must be positive");
        return MetricSpec(MetricKind::gaussian_induced, sigma);
    }

    /// Distance induced by the kernel k(x, y) = |x| + |y| - |x - y|.
    static MetricSpec hsic_kernel_induced() {
        return MetricSpec(MetricKind::hsic_kernel_induced, 1.0);
    }

    MetricKind kind() const { return kind_; }
    double parameter() const { return parameter_; }

   private:
    MetricSpec(MetricKind kind, double parameter) : kind_(kind), parameter_(parameter) {}

    MetricKind kind_;
    double parameter_;
};

enum class Centering { double_centered, u_centered };

struct CenteredDistanceMatrix {
    Matrix raw;
    Matrix centered;
    Centering mode;
};

namespace detail {

inline double hsic_kernel(double norm_a, double norm_b, double norm_diff) {
    return norm_a + norm_b - norm_diff;
}

}  // namespace detail

inline Matrix pairwise_distances(const Sample& sample, const MetricSpec& metric = MetricSpec::euclidean()) {
    const Matrix& v = sample.values();
    const Eigen::Index n = v.rows();
    Matrix raw = Matrix::Zero(n, n);
    Vector norms;
    if (metric.kind() == MetricKind::hsic_kernel_induced) norms = v.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (v.row(i) - v.row(j)).norm();
            double value = d;
            switch (metric.kind()) {
                case MetricKind::euclidean:
                    break;
                case MetricKind::alpha_power:
                    value = std::pow(d, metric.parameter());
                    break;
                case MetricKind::gaussian_induced: {
                    const double s = metric.parameter();
                    value = 1.0 - std::exp(-d * d / (2.0 * s * s));
                    break;
                }
                case MetricKind::hsic_kernel_induced: {
                    const double kii = detail::hsic_kernel(norms(i), norms(i), 0.0);
                    const double kjj = detail::hsic_kernel(norms(j), norms(j), 0.0);
                    value = 0.5 * (kii + kjj) - detail::hsic_kernel(norms(i), norms(j), d);
                    break;
                }
            }
            raw(i, j) = value;
            raw(j, i) = value;
        }
    }
    return raw;
}

inline void require_square(const Matrix& raw) {
    detail::require(raw.rows() == raw.cols() && raw.rows() >= 1, "distance matrix must be square");
}

/// A_ij = a_ij - mean_i. - mean_.j + mean_..
inline Matrix double_center(const Matrix& raw) {
    require_square(raw);
    const Vector row_means = raw.rowwise().mean();
    const Vector col_means = raw.colwise().mean().transpose();
    const double grand = raw.mean();
    Matrix out = raw;
    out.colwise() -= row_means;
    out.rowwise() -= col_means.transpose();
    out.array() += grand;
    return out;
}

/// U-centering; defined for n > 3, zero diagonal.
inline Matrix u_center(const Matrix& raw) {
    require_square(raw);
    const Eigen::Index n = raw.rows();
    detail::require(n > 3, "u_center: need n > 3");
    const double nd = static_cast<double>(n);
    const Vector row_sums = raw.rowwise().sum();
    const Vector col_sums = raw.colwise().sum().transpose();
    const double total = raw.sum();
    Matrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, j) = (i == j) ? 0.0
                                 : raw(i, j) - row_sums(i) / (nd - 2) - col_sums(j) / (nd - 2) +
                                       total / ((nd - 1) * (nd - 2));
        }
    }
    return out;
}

inline CenteredDistanceMatrix center(Matrix raw, Centering mode) {
    Matrix centered = mode == Centering::double_centered ? double_center(raw) : u_center(raw);
    return {std::move(raw), std::move(centered), mode};
}

/// Biased V-statistic (1/n^2) sum A_ij B_ij.
inline DcovValue dcov_v(const Sample& x, const Sample& y, const MetricSpec& metric = MetricSpec::euclidean()) {
    detail::require(x.rows() == y.rows(), "dcov_v: samples differ in size");
    detail::require(x.rows() >= 2, "dcov_v: need n >= 2");
    const Matrix a = double_center(pairwise_distances(x, metric));
    const Matrix b = double_center(pairwise_distances(y, metric));
    const double n = static_cast<double>(x.rows());
    return {std::max(0.0, a.cwiseProduct(b).sum() / (n * n)), Estimator::biased_v};
}

/// The same V-statistic from uncentered distances:
/// (1/n^2) sum a_ij b_ij + (1/n^4) sum a sum b - (2/n^3) sum_ijk a_ij b_jk.
inline double dcov_v_expanded(const Sample& x, const Sample& y, const MetricSpec& metric = MetricSpec::euclidean()) {
    detail::require(x.rows() == y.rows(), "dcov_v_expanded: samples differ in size");
    const Matrix a = pairwise_distances(x, metric);
    const Matrix b = pairwise_distances(y, metric);
    const double n = static_cast<double>(x.rows());
    const Vector a_cols = a.colwise().sum().transpose();
    const Vector b_rows = b.rowwise().sum();
    return a.cwiseProduct(b).sum() / (n * n) + a.sum() * b.sum() / (n * n * n * n) -
           2.0 * a_cols.dot(b_rows) / (n * n * n);
}

/// Unbiased estimator (1/(n(n-3))) sum_{i != j} A~_ij B~_ij; may be negative.
inline DcovValue dcov_u(const Sample& x, const Sample& y, const MetricSpec& metric = MetricSpec::euclidean()) {
    detail::require(x.rows() == y.rows(), "dcov_u: samples differ in size");
    detail::require(x.rows() > 3, "dcov_u: need n > 3");
    const Matrix a = u_center(pairwise_distances(x, metric));
    const Matrix b = u_center(pairwise_distances(y, metric));
    const double n = static_cast<double>(x.rows());
    return {a.cwiseProduct(b).sum() / (n * (n - 3)), Estimator::unbiased_u};
}

/// R from squared covariances, with the zero branch for a degenerate denominator.
inline double dcor_from_v2(double v2_xy, double v2_xx, double v2_yy) {
    const double denom = v2_xx * v2_yy;
    if (!(denom > 0.0)) return 0.0;
    const double r2 = v2_xy / std::sqrt(denom);
    return std::sqrt(std::clamp(r2, 0.0, 1.0));
}

/// Sample distance correlation R (the nonnegative root). Univariate Euclidean inputs go
/// through the O(n log n) path.
inline double dcor(const Sample& x, const Sample& y, const MetricSpec& metric = MetricSpec::euclidean()) {
    detail::require(x.rows() == y.rows(), "dcor: samples differ in size");
    detail::require(x.rows() >= 2, "dcor: need n >= 2");
    if (metric.kind() == MetricKind::euclidean && x.dim() == 1 && y.dim() == 1) {
        return dcor_from_v2(dcov_fast_univariate(x, y).v2, dcov_fast_univariate(x, x).v2,
                            dcov_fast_univariate(y, y).v2);
    }
    const Matrix a = double_center(pairwise_distances(x, metric));
    const Matrix b = double_center(pairwise_distances(y, metric));
    const double n2 = static_cast<double>(x.rows() * x.rows());
    return dcor_from_v2(a.cwiseProduct(b).sum() / n2, a.squaredNorm() / n2, b.squaredNorm() / n2);
}

/// Population R^2 for a standard bivariate normal pair with correlation r.
inline double dcor_normal_closed_form(double r) {
    detail::require(std::abs(r) <= 1.0, "dcor_normal_closed_form: |r| must be <= 1");
    const double num = r * std::asin(r) + std::sqrt(1 - r * r) - r * std::asin(r / 2) -
                       std::sqrt(4 - r * r) + 1;
    const double den = 1 + std::numbers::pi / 3 - std::sqrt(3.0);
    return std::clamp(num / den, 0.0, 1.0);
}

/// Population R^2 for the symmetric Bernoulli pair with P(X = Y) = p.
inline double dcor_bernoulli_closed_form(double p) {
    detail::require(p >= 0.0 && p <= 1.0, "dcor_bernoulli_closed_form: p must lie in [0, 1]");
    return (2 * p - 1) * (2 * p - 1);
}

namespace detail {

/// Sigma^{-1/2} (x - mean) with Sigma the divisor-n sample covariance.
inline Matrix whiten(const Sample& s) {
    const Matrix& v = s.values();
    require(v.rows() > v.cols(), "dcov_affine: need n > dimension");
    const Matrix centered = v.rowwise() - v.colwise().mean();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(v.rows());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const Vector& lambda = eig.eigenvalues();
    const double top = lambda.maxCoeff();
    if (!(top > 0.0) || lambda.minCoeff() < 1e-10 * top) {
        throw std::invalid_argument("dcov_affine: singular sample covariance");
    }
    const Matrix inv_sqrt = eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
                            eig.eigenvectors().transpose();
    return centered * inv_sqrt;
}

}  // namespace detail

/// Affinely invariant squared distance covariance V^2(S_x^{-1/2} x, S_y^{-1/2} y).
inline double dcov_affine(const Sample& x, const Sample& y) {
    detail::require(x.rows() == y.rows(), "dcov_affine: samples differ in size");
    return dcov_v(Sample(detail::whiten(x)), Sample(detail::whiten(y))).v2;
}

inline double dcor_affine(const Sample& x, const Sample& y) {
    detail::require(x.rows() == y.rows(), "dcor_affine: samples differ in size");
    return dcor(Sample(detail::whiten(x)), Sample(detail::whiten(y)));
}

/// Partial distance correlation R*(X, Y; Z) built from squared sample correlations.
inline double pdcor(const Sample& x, const Sample& y, const Sample& z) {
    detail::require(x.rows() == y.rows() && x.rows() == z.rows(), "pdcor: samples differ in size");
    const double rxy = dcor(x, y), rxz = dcor(x, z), ryz = dcor(y, z);
    const double r2xy = rxy * rxy, r2xz = rxz * rxz, r2yz = ryz * ryz;
    // R = 1 up to rounding counts as the degenerate branch.
    constexpr double one = 1.0 - 1e-12;
    if (r2xz >= one || r2yz >= one) return 0.0;
    return (r2xy - r2xz * r2yz) / (std::sqrt(1 - r2xz * r2xz) * std::sqrt(1 - r2yz * r2yz));
}

/// Average ranks (1-based); ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    for (std::size_t k = 0; k < n;) {
        std::size_t m = k;
        while (m + 1 < n && x[order[m + 1]] == x[order[k]]) ++m;
        const double avg = 0.5 * static_cast<double>(k + m) + 1.0;
        for (std::size_t q = k; q <= m; ++q) ranks[order[q]] = avg;
        k = m + 1;
    }
    return ranks;
}

/// Approximate normal scores Phi^{-1}((rank - 3/8) / (n + 1/4)).
inline std::vector<double> normal_scores(std::span<const double> x) {
    detail::require(!x.empty(), "normal_scores: empty input");
    detail::require_finite(x, "normal_scores");
    const auto ranks = average_ranks(x);
    const double n = static_cast<double>(x.size());
    const boost::math::normal_distribution<double> phi;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = boost::math::quantile(phi, (ranks[i] - 0.375) / (n + 0.25));
    }
    return out;
}

/// n times the squared distance covariance of the normal scores.
inline double feuerverger_statistic(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size(), "feuerverger_statistic: length mismatch");
    const auto sx = normal_scores(x);
    const auto sy = normal_scores(y);
    return static_cast<double>(x.size()) * dcov_fast_univariate(sx, sy).v2;
}

/// Indices of the d predictors (columns) with the largest R(X_k, Y), descending;
/// equal scores keep the lower index first.
inline std::vector<std::size_t> dcor_screen(const Matrix& predictors, std::span<const double> response,
                                            std::size_t d) {
    detail::require(d >= 1, "dcor_screen: d must be positive");
    detail::require(d <= static_cast<std::size_t>(predictors.cols()), "dcor_screen: d exceeds predictor count");
    detail::require(static_cast<std::size_t>(predictors.rows()) == response.size(),
                    "dcor_screen: predictor rows differ from response length");
    const Sample y(response);
    std::vector<double> score(static_cast<std::size_t>(predictors.cols()));
    for (Eigen::Index k = 0; k < predictors.cols(); ++k) {
        score[static_cast<std::size_t>(k)] = dcor(Sample(Matrix(predictors.col(k))), y);
    }
    std::vector<std::size_t> order(score.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    order.resize(d);
    return order;
}

}  // namespace serialdep
