#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace serialdep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) throw std::invalid_argument(message);
}

inline void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + ": non-finite value");
        }
    }
}

inline void require_finite(const Matrix& values, const char* what) {
    if (!values.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite value");
    }
}

}  // namespace detail

/// n observations of a p-dimensional random vector, stored row-wise.
class Sample {
   public:
    explicit Sample(Matrix values) : values_(std::move(values)) {
        detail::require(values_.rows() >= 1 && values_.cols() >= 1, "Sample: empty");
        detail::require_finite(values_, "Sample");
    }

    /// Univariate sample (n x 1).
    Sample(std::span<const double> column)
        : Sample(Matrix(Eigen::Map<const Vector>(column.data(),
                                                 static_cast<Eigen::Index>(column.size())))) {}

    Sample(const std::vector<double>& column) : Sample(std::span<const double>(column)) {}

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(values_.cols()); }
    const Matrix& values() const { return values_; }

   private:
    Matrix values_;
};

/// Time-ordered univariate observations with unit spacing.
class Series {
   public:
    Series() = default;
    explicit Series(std::vector<double> values) : values_(std::move(values)) {
        detail::require(values_.size() >= 2, "Series: need at least 2 observations");
        detail::require_finite(values_, "Series");
    }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t t) const { return values_[t]; }
    const std::vector<double>& values() const { return values_; }
    operator std::span<const double>() const { return values_; }

   private:
    std::vector<double> values_;
};

/// n x d matrix of observations, one column per labelled component.
class MultiSeries {
   public:
    MultiSeries() = default;
    explicit MultiSeries(Matrix values, std::vector<std::string> labels = {})
        : values_(std::move(values)), labels_(std::move(labels)) {
        detail::require(values_.cols() >= 1, "MultiSeries: need at least one component");
        detail::require(values_.rows() >= 2, "MultiSeries: need at least 2 observations");
        detail::require_finite(values_, "MultiSeries");
        if (labels_.empty()) {
            for (Eigen::Index r = 0; r < values_.cols(); ++r) {
                labels_.push_back("X" + std::to_string(r + 1));
            }
        }
        detail::require(labels_.size() == static_cast<std::size_t>(values_.cols()),
                        "MultiSeries: label count does not match column count");
    }

    static MultiSeries from_series(std::span<const double> x) {
        return MultiSeries(Matrix(Eigen::Map<const Vector>(x.data(),
                                                           static_cast<Eigen::Index>(x.size()))));
    }

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(values_.cols()); }
    const Matrix& values() const { return values_; }
    const std::vector<std::string>& labels() const { return labels_; }

    /// Column r as a contiguous view (Eigen storage is column-major).
    std::span<const double> component(std::size_t r) const {
        return {values_.col(static_cast<Eigen::Index>(r)).data(), rows()};
    }

   private:
    Matrix values_;
    std::vector<std::string> labels_;
};

}  // namespace serialdep
