#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "serialdep/io.hpp"
#include "serialdep/parallel.hpp"
#include "serialdep/resampling.hpp"
#include "serialdep/timeseries.hpp"
#include "serialdep/types.hpp"

namespace serialdep {

struct BandsPlan {
    bool pairwise = true;       // subsampling band per lag and component pair
    bool simultaneous = true;   // wild bootstrap band over all lags
    std::size_t B = 299;
    std::uint64_t seed = 0;
    double level = 0.95;
    std::optional<std::size_t> block;  // minimum volatility choice when absent
    Multiplier multiplier = Multiplier::normal;
};

struct PlotRecord {
    int lag;
    std::string row;     // component at time t
    std::string column;  // component at time t + lag
    double adcf;
    double pairwise_band;      // NaN when not computed
    double simultaneous_band;  // NaN when not computed
    std::size_t block;         // subsampling block length, 0 when not computed
};

struct PlotData {
    std::vector<PlotRecord> records;  // ascending lag, then row, then column
};

/// ADCF values for lags 1..max_lag with the requested bands.
inline PlotData adcf_plot_data(const MultiSeries& x, int max_lag, const BandsPlan& plan) {
    detail::require(max_lag >= 1 && static_cast<std::size_t>(max_lag) + 2 <= x.rows(),
                    "adcf_plot_data: max lag must lie in [1, n - 2]");
    const std::size_t d = x.dim();
    const LagProfile profile = lag_profile(x, max_lag);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> simultaneous(static_cast<std::size_t>(max_lag), nan);
    if (plan.simultaneous) {
        std::vector<int> lags(static_cast<std::size_t>(max_lag));
        for (int j = 1; j <= max_lag; ++j) lags[static_cast<std::size_t>(j - 1)] = j;
        simultaneous = d == 1 ? wild_bootstrap_band(x.component(0), lags, plan.B, plan.seed, plan.level, plan.multiplier)
                              : wild_bootstrap_band(x, lags, plan.B, plan.seed, plan.level, plan.multiplier);
    }

    const std::size_t cells = static_cast<std::size_t>(max_lag) * d * d;
    PlotData out;
    out.records.resize(cells);
    const Vector v0 = profile.adcv[0].diagonal();
    parallel_for(cells, [&](std::size_t c) {
        const std::size_t k = c / (d * d);
        const std::size_t r = (c / d) % d;
        const std::size_t m = c % d;
        const int lag = static_cast<int>(k) + 1;
        PlotRecord rec{lag, x.labels()[r], x.labels()[m],
                       profile.adcf[k + 1](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m)),
                       nan, simultaneous[k], 0};
        if (plan.pairwise) {
            const std::size_t pairs = x.rows() - static_cast<std::size_t>(lag);
            std::size_t block = 0;
            if (plan.block) {
                block = *plan.block;
            } else {
                auto candidates = default_block_candidates(pairs);
                detail::require(candidates.size() >= 3, "adcf_plot_data: series too short for block selection");
                std::vector<double> bands(candidates.size());
                for (std::size_t q = 0; q < candidates.size(); ++q) {
                    bands[q] = subsample_band(x.component(r), x.component(m), lag, candidates[q], plan.level);
                }
                block = candidates[min_volatility_select(bands)];
            }
            const double cv = subsample_band(x.component(r), x.component(m), lag, block, plan.level);
            const double denom = std::sqrt(v0(static_cast<Eigen::Index>(r)) * v0(static_cast<Eigen::Index>(m)));
            rec.pairwise_band = denom > 0.0 ? std::sqrt(std::clamp(cv / denom, 0.0, 1.0)) : 0.0;
            rec.block = block;
        }
        out.records[c] = rec;
    });
    return out;
}

inline PlotData adcf_plot_data(std::span<const double> x, int max_lag, const BandsPlan& plan) {
    return adcf_plot_data(MultiSeries::from_series(x), max_lag, plan);
}

inline const char* kPlotCsvHeader = "lag,row,column,adcf,pairwise_band,simultaneous_band,block";

inline std::string plot_to_csv(const PlotData& data) {
    std::ostringstream out;
    out << kPlotCsvHeader << '\n';
    for (const auto& r : data.records) {
        out << r.lag << ',' << r.row << ',' << r.column << ',' << format_double(r.adcf) << ','
            << format_double(r.pairwise_band) << ',' << format_double(r.simultaneous_band) << ',' << r.block
            << '\n';
    }
    return out.str();
}

inline PlotData plot_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kPlotCsvHeader) throw data_error("plot data: unexpected header");
    auto number = [](std::string_view cell) {
        if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
        double v = 0;
        if (!detail::parse_number(cell, v)) throw data_error("plot data: bad number");
        return v;
    };
    PlotData data;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 7) throw data_error("plot data: expected 7 columns");
        data.records.push_back({static_cast<int>(number(cells[0])), std::string(cells[1]), std::string(cells[2]),
                                number(cells[3]), number(cells[4]), number(cells[5]),
                                static_cast<std::size_t>(number(cells[6]))});
    }
    return data;
}

}  // namespace serialdep
