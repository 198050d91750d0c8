#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "serialdep/io.hpp"
#include "serialdep/plot.hpp"
#include "serialdep/var.hpp"

using namespace serialdep;

TEST(ReadSeries, HeaderDetectionAndValues) {
    const auto a = parse_series("x,y\n1,2\n3,4.5\n-1e-3,+7\n");
    EXPECT_EQ(a.rows(), 3u);
    EXPECT_EQ(a.labels(), (std::vector<std::string>{"x", "y"}));
    EXPECT_DOUBLE_EQ(a.values()(2, 0), -1e-3);
    EXPECT_DOUBLE_EQ(a.values()(2, 1), 7.0);
    const auto b = parse_series("1\r\n2\r\n\r\n3\r\n");
    EXPECT_EQ(b.rows(), 3u);
    EXPECT_EQ(b.labels()[0], "X1");
    const auto c = parse_series("\xEF\xBB\xBF\"a\"\n1\n2\n");
    EXPECT_EQ(c.labels()[0], "a");
}

TEST(ReadSeries, RejectsMalformedInput) {
    EXPECT_THROW(parse_series("x,y\n"), data_error);
    EXPECT_THROW(parse_series("x\n1\n"), data_error);
    EXPECT_THROW(parse_series("x,y\n1,2\n3\n"), data_error);
    EXPECT_THROW(parse_series("x\n1\nabc\n"), data_error);
    EXPECT_THROW(parse_series("x,y\n1,\n2,3\n"), data_error);
    EXPECT_THROW(parse_series("x\n1\nnan\n"), data_error);
    EXPECT_THROW(parse_series("x\n1\n-2\n", {true, false}), data_error);
    EXPECT_THROW(read_series("/nonexistent/file.csv"), data_error);
}

TEST(ReadSeries, LogThenDifference) {
    std::ostringstream text;
    text << "a,b\n";
    for (int t = 1; t <= 700; ++t) text << t << ',' << 2 * t << '\n';
    const auto x = parse_series(text.str(), {true, true});
    EXPECT_EQ(x.rows(), 699u);
    EXPECT_EQ(x.dim(), 2u);
    EXPECT_NEAR(x.values()(0, 0), std::log(2.0), 1e-15);
    EXPECT_NEAR(x.values()(0, 1), std::log(2.0), 1e-15);
    const auto c = parse_series("v\n3\n3\n3\n3\n", {true, false});
    EXPECT_EQ(c.rows(), 4u);
    EXPECT_EQ(adcf(c.component(0), 1), 0.0);
}

TEST(ReadSeries, CsvRoundTrip) {
    Matrix m(5, 2);
    m << 0.1, 1e-300, -2.5, 3.0, 1.0 / 3.0, 7.0, 2.0, -0.0, 1e10, 4.0;
    const MultiSeries x(m, {"p", "q"});
    const auto back = parse_series(series_to_csv(x));
    EXPECT_EQ(back.labels(), x.labels());
    EXPECT_EQ(back.values(), x.values());
}

namespace {

Matrix simulate_var1(const Matrix& phi, const Vector& c, std::size_t n, double noise, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const auto d = phi.rows();
    Matrix x(static_cast<Eigen::Index>(n), d);
    Vector prev = Vector::Ones(d);
    for (std::size_t t = 0; t < n; ++t) {
        Vector e(d);
        for (Eigen::Index k = 0; k < d; ++k) e(k) = noise * z(rng);
        prev = c + phi * prev + e;
        x.row(static_cast<Eigen::Index>(t)) = prev.transpose();
    }
    return x;
}

}  // namespace

TEST(Var, ExactRecoveryWithoutNoise) {
    Matrix phi(2, 2);
    phi << 0.6, -0.3, 0.25, 0.5;
    Vector c(2);
    c << 0.2, -0.1;
    // Deterministic spiral towards the fixed point; the trajectory spans both directions.
    const MultiSeries x(simulate_var1(phi, c, 30, 0.0, 1));
    const VarModel m = var_fit(x, 1);
    EXPECT_LT((m.coefficients[0] - phi).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((m.intercept - c).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT(m.residuals.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(m.residuals.rows(), 29);
}

TEST(Var, WhiteNoiseCoefficientsNearZero) {
    const MultiSeries x(simulate_var1(Matrix::Zero(3, 3), Vector::Zero(3), 2000, 1.0, 2));
    const VarModel m = var_fit(x, 2);
    for (const auto& phi : m.coefficients) EXPECT_LT(phi.cwiseAbs().maxCoeff(), 0.1);
    EXPECT_LT((m.sigma - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.15);
    EXPECT_LT((m.sigma - m.sigma.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Var, PreconditionsAndRankDeficiency) {
    const MultiSeries tiny(simulate_var1(Matrix::Zero(2, 2), Vector::Zero(2), 5, 1.0, 3));
    EXPECT_THROW(var_fit(tiny, 2), std::invalid_argument);
    Matrix dup = simulate_var1(Matrix::Zero(2, 2), Vector::Zero(2), 50, 1.0, 4);
    dup.col(1) = dup.col(0);
    EXPECT_THROW(var_fit(MultiSeries(dup), 1), std::domain_error);
}

TEST(Var, OrderSelection) {
    const MultiSeries noise(simulate_var1(Matrix::Zero(2, 2), Vector::Zero(2), 300, 1.0, 5));
    EXPECT_EQ(var_order_select(noise, 1), 1);
    EXPECT_EQ(var_aic(noise, 4).size(), 4u);
    int hits = 0;
    for (unsigned s = 0; s < 20; ++s) {
        // VAR(2): X_t = 0.5 X_{t-1} - 0.6 X_{t-2} + e_t, componentwise.
        std::mt19937_64 rng(100 + s);
        std::normal_distribution<double> z;
        Matrix x(400, 2);
        x.row(0).setZero();
        x.row(1).setZero();
        for (int t = 2; t < 400; ++t) {
            for (int k = 0; k < 2; ++k) x(t, k) = 0.5 * x(t - 1, k) - 0.6 * x(t - 2, k) + z(rng);
        }
        hits += var_order_select(MultiSeries(x), 6) == 2;
    }
    EXPECT_GE(hits, 14);
}

TEST(PlotData, ShapeBandsAndRoundTrip) {
    const auto e = oracle::normals(302, 7);
    std::vector<double> x(300);
    for (std::size_t t = 0; t < 300; ++t) x[t] = e[t] * e[t + 1] * e[t + 2];
    BandsPlan plan;
    plan.B = 49;
    plan.seed = 3;
    const PlotData p = adcf_plot_data(x, 6, plan);
    ASSERT_EQ(p.records.size(), 6u);
    for (std::size_t k = 0; k < 6; ++k) {
        EXPECT_EQ(p.records[k].lag, static_cast<int>(k) + 1);
        EXPECT_GT(p.records[k].pairwise_band, 0.0);
        EXPECT_GT(p.records[k].simultaneous_band, 0.0);
        EXPECT_GE(p.records[k].block, 2u);
        EXPECT_DOUBLE_EQ(p.records[k].adcf, adcf(x, static_cast<int>(k) + 1));
    }
    const std::string csv = plot_to_csv(p);
    EXPECT_EQ(plot_to_csv(plot_from_csv(csv)), csv);

    BandsPlan only_sub = plan;
    only_sub.simultaneous = false;
    only_sub.block = 12;
    const PlotData q = adcf_plot_data(x, 3, only_sub);
    EXPECT_TRUE(std::isnan(q.records[0].simultaneous_band));
    EXPECT_EQ(q.records[0].block, 12u);
    EXPECT_NEAR(q.records[1].pairwise_band, subsample_adcf_band(x, 2, 12, 0.95), 1e-15);
    EXPECT_EQ(plot_to_csv(plot_from_csv(plot_to_csv(q))), plot_to_csv(q));
}

TEST(PlotData, MultivariateRecords) {
    Matrix m(120, 2);
    const auto a = oracle::normals(120, 1), b = oracle::normals(120, 2);
    for (int t = 0; t < 120; ++t) m(t, 0) = a[t], m(t, 1) = b[t];
    BandsPlan plan;
    plan.B = 19;
    const PlotData p = adcf_plot_data(MultiSeries(m, {"u", "v"}), 2, plan);
    ASSERT_EQ(p.records.size(), 8u);
    EXPECT_EQ(p.records[1].row, "u");
    EXPECT_EQ(p.records[1].column, "v");
    EXPECT_EQ(p.records[4].lag, 2);
    EXPECT_THROW(adcf_plot_data(MultiSeries(m), 119, plan), std::invalid_argument);
}
