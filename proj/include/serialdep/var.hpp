#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "serialdep/types.hpp"

namespace serialdep {

struct VarModel {
    int order = 0;
    std::vector<Matrix> coefficients;  // Phi_1..Phi_p, each d x d
    Vector intercept;
    Matrix residuals;  // (n - p) x d
    Matrix sigma;      // innovation covariance, divisor n - p
};

namespace detail {

/// Least-squares fit of X_t on (1, X_{t-1}, ..., X_{t-p}) for t = first..n-1.
inline VarModel var_fit_from(const Matrix& x, int p, std::size_t first) {
    const auto n = static_cast<Eigen::Index>(x.rows());
    const Eigen::Index d = x.cols();
    const Eigen::Index rows = n - static_cast<Eigen::Index>(first);
    const Eigen::Index k = 1 + d * p;
    if (rows <= k) throw std::invalid_argument("var_fit: too few observations for this order");
    Matrix z(rows, k);
    Matrix y(rows, d);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index t = static_cast<Eigen::Index>(first) + r;
        z(r, 0) = 1.0;
        for (int l = 1; l <= p; ++l) z.block(r, 1 + d * (l - 1), 1, d) = x.row(t - l);
        y.row(r) = x.row(t);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(z);
    if (qr.rank() < k) throw std::domain_error("var_fit: regressor matrix is rank deficient");
    const Matrix beta = qr.solve(y);  // k x d
    VarModel m;
    m.order = p;
    m.intercept = beta.row(0).transpose();
    for (int l = 1; l <= p; ++l) m.coefficients.push_back(beta.block(1 + d * (l - 1), 0, d, d).transpose());
    m.residuals = y - z * beta;
    m.sigma = m.residuals.transpose() * m.residuals / static_cast<double>(rows);
    return m;
}

}  // namespace detail

/// VAR(p) with intercept by multivariate least squares.
inline VarModel var_fit(const MultiSeries& x, int p) {
    detail::require(p >= 1, "var_fit: order must be at least 1");
    detail::require(x.rows() > x.dim() * static_cast<std::size_t>(p) + 1, "var_fit: need n > d p + 1");
    return detail::var_fit_from(x.values(), p, static_cast<std::size_t>(p));
}

/// ln det(Sigma) + 2 d^2 p / T for p = 1..max_order, all fitted on the common sample
/// t = max_order..n-1 so the criteria are comparable.
inline std::vector<double> var_aic(const MultiSeries& x, int max_order) {
    detail::require(max_order >= 1, "var_order_select: max order must be at least 1");
    const auto first = static_cast<std::size_t>(max_order);
    detail::require(x.rows() > first, "var_order_select: max order too large");
    const double d = static_cast<double>(x.dim());
    const double t = static_cast<double>(x.rows() - first);
    std::vector<double> aic;
    for (int p = 1; p <= max_order; ++p) {
        const VarModel m = detail::var_fit_from(x.values(), p, first);
        Eigen::LDLT<Matrix> ldlt(m.sigma);
        double logdet = 0;
        for (Eigen::Index i = 0; i < ldlt.vectorD().size(); ++i) {
            const double v = ldlt.vectorD()(i);
            logdet += v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
        }
        aic.push_back(logdet + 2.0 * d * d * p / t);
    }
    return aic;
}

/// Order in 1..max_order minimising AIC (the smallest on ties).
inline int var_order_select(const MultiSeries& x, int max_order) {
    const auto aic = var_aic(x, max_order);
    std::size_t best = 0;
    for (std::size_t k = 1; k < aic.size(); ++k) {
        if (aic[k] < aic[best]) best = k;
    }
    return static_cast<int>(best) + 1;
}

}  // namespace serialdep
