#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "serialdep/io.hpp"
#include "serialdep/kernels.hpp"
#include "serialdep/lag_cache.hpp"
#include "serialdep/models.hpp"
#include "serialdep/parallel.hpp"
#include "serialdep/portmanteau.hpp"
#include "serialdep/resampling.hpp"

namespace serialdep {

struct ExperimentConfig {
    std::vector<ModelSpec> models{ModelSpec::of(ModelKind::iid_normal)};
    std::vector<std::size_t> sample_sizes{100};
    std::vector<double> lambdas{0.1, 0.2, 0.3};
    std::vector<StatisticKind> statistics{StatisticKind::BP,  StatisticKind::LB, StatisticKind::H96,
                                          StatisticKind::H98, StatisticKind::H99, StatisticKind::ST,
                                          StatisticKind::FP};
    std::size_t B = 299;
    std::size_t experiments = 500;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    KernelSpec kernel{};
    double bandwidth_constant = 3.0;  // p = ceil(c n^lambda)

    void validate() const {
        detail::require(!models.empty() && !sample_sizes.empty() && !lambdas.empty() && !statistics.empty(),
                        "experiment: every grid dimension needs at least one value");
        detail::require(B >= 1 && experiments >= 1, "experiment: counts must be at least 1");
        detail::require(alpha > 0.0 && alpha < 1.0, "experiment: alpha must lie in (0, 1)");
        for (auto s : statistics) {
            detail::require(!is_multivariate(s) && s != StatisticKind::Feuerverger && s != StatisticKind::nV2,
                            "experiment: only univariate serial statistics can be simulated");
        }
        for (auto n : sample_sizes) detail::require(n >= 4, "experiment: sample sizes must be at least 4");
    }
};

struct ExperimentRow {
    ModelKind model;
    std::size_t n;
    double lambda;
    int p;
    StatisticKind statistic;
    double rate_pct;  // NaN when the cell failed
    std::size_t n_experiments;
    std::size_t B;
    double alpha;
    std::uint64_t seed;
    std::string error;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    double runtime_seconds = 0.0;  // wall time; kept out of the serialized report
};

/// Rejection rates of bootstrap-calibrated tests over simulated series. Every replicate
/// evaluates all (lambda, statistic) combinations on one shared cache, so the statistics
/// see common random numbers.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (const ModelSpec& model : config.models) {
        for (std::size_t n : config.sample_sizes) {
            struct Combo {
                double lambda;
                int p;
                StatisticKind stat;
                std::string error;
            };
            std::vector<Combo> combos;
            for (double lambda : config.lambdas) {
                int p = 0;
                std::string error;
                try {
                    p = resolve_bandwidth(config.bandwidth_constant, lambda, n);
                    if (static_cast<std::size_t>(p) + 2 > n) throw std::invalid_argument("bandwidth too large for n");
                } catch (const std::exception& e) {
                    error = e.what();
                }
                for (auto s : config.statistics) combos.push_back({lambda, p, s, error});
            }
            const std::size_t k = combos.size();
            auto evaluate_all = [&](const std::vector<double>& series) {
                SerialCache cache(series);
                std::vector<double> out(k, nan);
                for (std::size_t c = 0; c < k; ++c) {
                    if (!combos[c].error.empty()) continue;
                    try {
                        out[c] = evaluate(combos[c].stat, cache, config.kernel, combos[c].p);
                    } catch (const std::exception&) {
                    }
                }
                return out;
            };

            const auto model_key = static_cast<std::uint64_t>(model.kind);
            std::vector<std::vector<char>> reject(config.experiments);
            std::vector<std::vector<char>> failed(config.experiments);
            parallel_for(config.experiments, [&](std::size_t e) {
                const auto x = generate(model, n, stream_seed(config.seed, {model_key, n, e, 0}));
                const std::vector<double> observed = evaluate_all(x);
                const std::uint64_t boot_seed = stream_seed(config.seed, {model_key, n, e, 1});
                const Matrix reps = bootstrap_replicates(x, config.B, boot_seed, k, evaluate_all);
                reject[e].assign(k, 0);
                failed[e].assign(k, 0);
                for (std::size_t c = 0; c < k; ++c) {
                    if (std::isnan(observed[c]) || reps.col(static_cast<Eigen::Index>(c)).hasNaN()) {
                        failed[e][c] = 1;
                        continue;
                    }
                    std::size_t exceed = 0;
                    for (Eigen::Index b = 0; b < reps.rows(); ++b) {
                        exceed += reps(b, static_cast<Eigen::Index>(c)) >= observed[c] ? 1 : 0;
                    }
                    const double pv = (1.0 + static_cast<double>(exceed)) / (static_cast<double>(config.B) + 1.0);
                    reject[e][c] = pv <= config.alpha ? 1 : 0;
                }
            });

            for (std::size_t c = 0; c < k; ++c) {
                ExperimentRow row{model.kind, n,   combos[c].lambda, combos[c].p,      combos[c].stat, nan,
                                  config.experiments, config.B, config.alpha, config.seed, combos[c].error};
                std::size_t hits = 0, bad = 0;
                for (std::size_t e = 0; e < config.experiments; ++e) {
                    hits += static_cast<std::size_t>(reject[e][c]);
                    bad += static_cast<std::size_t>(failed[e][c]);
                }
                if (row.error.empty() && bad > 0) {
                    row.error = "statistic could not be evaluated in " + std::to_string(bad) + " experiments";
                }
                if (row.error.empty()) {
                    row.rate_pct = 100.0 * static_cast<double>(hits) / static_cast<double>(config.experiments);
                }
                report.rows.push_back(std::move(row));
            }
        }
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

inline const char* kExperimentCsvHeader = "model,n,lambda,p,statistic,rate_pct,n_experiments,B,alpha,seed";

inline std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << kExperimentCsvHeader << '\n';
    for (const auto& r : report.rows) {
        out << model_name(r.model) << ',' << r.n << ',' << format_double(r.lambda) << ',' << r.p << ','
            << statistic_name(r.statistic) << ',' << format_double(r.rate_pct) << ',' << r.n_experiments << ','
            << r.B << ',' << format_double(r.alpha) << ',' << r.seed << '\n';
    }
    return out.str();
}

/// Inverse of report_to_csv (failure messages are not carried by the CSV form).
inline ExperimentReport report_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kExperimentCsvHeader) {
        throw data_error("experiment report: unexpected header");
    }
    ExperimentReport report;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 10) throw data_error("experiment report: expected 10 columns");
        auto number = [](std::string_view cell) {
            if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
            double v = 0;
            if (!detail::parse_number(cell, v)) throw data_error("experiment report: bad number");
            return v;
        };
        ExperimentRow r{};
        r.model = parse_model(cells[0]);
        r.n = static_cast<std::size_t>(number(cells[1]));
        r.lambda = number(cells[2]);
        r.p = static_cast<int>(number(cells[3]));
        r.statistic = parse_statistic(cells[4]);
        r.rate_pct = number(cells[5]);
        r.n_experiments = static_cast<std::size_t>(number(cells[6]));
        r.B = static_cast<std::size_t>(number(cells[7]));
        r.alpha = number(cells[8]);
        r.seed = std::stoull(std::string(cells[9]));
        report.rows.push_back(r);
    }
    return report;
}

}  // namespace serialdep
