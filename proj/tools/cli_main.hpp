#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "serialdep/serialdep.hpp"

namespace serialdep::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Flags that parse but make no sense together.
class usage_error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct Options {
    // shared
    std::uint64_t seed = 1;
    std::size_t boot = 299;
    std::string kernel = "bartlett";
    std::vector<double> lambdas;
    int bandwidth = 0;
    double constant = 3.0;
    int lags = 0;
    double alpha = 0.05;
    std::string method;
    std::size_t block = 0;
    std::string out;
    std::string format = "json";
    bool log = false;
    bool diff = false;
    std::string file;

    // dcov / dcor
    std::vector<int> x_cols{1};
    std::vector<int> y_cols{2};
    std::vector<int> z_cols;
    std::string metric = "euclidean";
    double exponent = 1.0;
    double sigma = 1.0;
    std::string estimator = "v";
    bool affine = false;
    bool feuerverger = false;
    std::size_t screen = 0;

    // test
    std::vector<std::string> stats;
    int column = 0;

    // var
    std::string order = "auto";
    int max_order = 10;
    std::string residuals_out;

    // simulate
    std::vector<std::string> models;
    std::vector<std::size_t> sizes{100};
    std::size_t experiments = 500;
    bool full_scale = false;

    // which flags were given
    bool has_lambda = false, has_bandwidth = false, has_lags = false, has_block = false, has_boot = false,
         has_experiments = false, has_alpha = false;
};

// Serialization ----------------------------------------------------------------------

inline Json to_json(const TestResult& r, std::optional<double> lambda, std::optional<double> alpha) {
    Json j;
    j["statistic"] = std::string(statistic_name(r.statistic.name));
    if (r.statistic.p > 0) j["p"] = r.statistic.p;
    if (lambda) j["lambda"] = *lambda;
    if (r.statistic.kernel) j["kernel"] = std::string(kernel_name(r.statistic.kernel->kind));
    j["value"] = r.statistic.value;
    j["p_value"] = r.p_value;
    j["B"] = r.B_used;
    j["seed"] = r.seed;
    if (alpha) {
        j["alpha"] = *alpha;
        if (r.critical_value) j["critical_value"] = *r.critical_value;
        j["reject"] = r.p_value <= *alpha;
    }
    return j;
}

inline Json to_json(const ExperimentReport& report) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "simulate";
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        Json row;
        row["model"] = std::string(model_name(r.model));
        row["n"] = r.n;
        row["lambda"] = r.lambda;
        row["p"] = r.p;
        row["statistic"] = std::string(statistic_name(r.statistic));
        row["rate_pct"] = r.rate_pct;
        row["n_experiments"] = r.n_experiments;
        row["B"] = r.B;
        row["alpha"] = r.alpha;
        row["seed"] = r.seed;
        if (!r.error.empty()) row["error"] = r.error;
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

inline Json to_json(const PlotData& data) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "adcf";
    Json rows = Json::array();
    for (const auto& r : data.records) {
        Json row;
        row["lag"] = r.lag;
        row["row"] = r.row;
        row["column"] = r.column;
        row["adcf"] = r.adcf;
        row["pairwise_band"] = r.pairwise_band;
        row["simultaneous_band"] = r.simultaneous_band;
        row["block"] = r.block;
        rows.push_back(row);
    }
    j["records"] = rows;
    return j;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Helpers ------------------------------------------------------------------------------

inline Sample columns_of(const MultiSeries& data, const std::vector<int>& cols, const char* flag) {
    if (cols.empty()) throw usage_error(std::string(flag) + " needs at least one column");
    Matrix m(data.values().rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] < 1 || static_cast<std::size_t>(cols[k]) > data.dim()) {
            throw data_error(std::string(flag) + ": column " + std::to_string(cols[k]) + " not in file");
        }
        m.col(static_cast<Eigen::Index>(k)) = data.values().col(cols[k] - 1);
    }
    return Sample(std::move(m));
}

inline MetricSpec metric_of(const Options& o) {
    if (o.metric == "euclidean") return MetricSpec::euclidean();
    if (o.metric == "alpha") return MetricSpec::alpha_power(o.exponent);
    if (o.metric == "gaussian") return MetricSpec::gaussian_induced(o.sigma);
    if (o.metric == "hsic") return MetricSpec::hsic_kernel_induced();
    throw usage_error("unknown metric " + o.metric);
}

inline std::vector<int> bandwidths_for(const Options& o, std::size_t n, std::vector<std::optional<double>>& lambdas) {
    std::vector<int> out;
    lambdas.clear();
    if (o.has_bandwidth) {
        if (o.bandwidth < 1) throw usage_error("--bandwidth must be at least 1");
        out.push_back(o.bandwidth);
        lambdas.push_back(std::nullopt);
        return out;
    }
    const std::vector<double> ls = o.lambdas.empty() ? std::vector<double>{0.1} : o.lambdas;
    for (double l : ls) {
        out.push_back(resolve_bandwidth(o.constant, l, n));
        lambdas.push_back(l);
    }
    return out;
}

inline void check_format(const Options& o) {
    if (o.format != "json" && o.format != "csv") throw usage_error("--format must be csv or json");
}

inline void reject_flag(bool given, const char* flag, const char* command) {
    if (given) throw usage_error(std::string(flag) + " is not used by " + command);
}

// Commands -------------------------------------------------------------------------------

inline std::string run_dcov_like(const Options& o, bool correlation) {
    check_format(o);
    reject_flag(o.has_block, "--block", correlation ? "dcor" : "dcov");
    if (!o.method.empty() && o.method != "perm") throw usage_error("dcov/dcor support only --method perm");
    const MultiSeries data = read_series(o.file, {o.log, o.diff});
    const Sample x = columns_of(data, o.x_cols, "--x");
    const Sample y = columns_of(data, o.y_cols, "--y");
    const MetricSpec metric = metric_of(o);

    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = correlation ? "dcor" : "dcov";
    j["n"] = data.rows();
    j["metric"] = o.metric;
    std::string quantity;
    double value = 0;
    if (o.screen > 0) {
        if (!correlation) throw usage_error("--screen belongs to dcor");
        if (y.dim() != 1) throw usage_error("--screen needs a single response column in --y");
        const Matrix& yv = y.values();
        const auto keep = dcor_screen(x.values(), std::span<const double>(yv.data(), y.rows()), o.screen);
        Json sel = Json::array();
        for (auto k : keep) sel.push_back(o.x_cols[k]);
        j["selected_columns"] = sel;
        quantity = "screen";
    } else if (o.feuerverger) {
        if (x.dim() != 1 || y.dim() != 1) throw usage_error("--feuerverger needs univariate --x and --y");
        const Matrix& xv = x.values();
        const Matrix& yv = y.values();
        value = feuerverger_statistic(std::span<const double>(xv.data(), x.rows()),
                                      std::span<const double>(yv.data(), y.rows()));
        quantity = "feuerverger";
    } else if (!o.z_cols.empty()) {
        if (!correlation) throw usage_error("--z belongs to dcor");
        value = pdcor(x, y, columns_of(data, o.z_cols, "--z"));
        quantity = "pdcor";
    } else if (o.affine) {
        value = correlation ? dcor_affine(x, y) : dcov_affine(x, y);
        quantity = correlation ? "dcor_affine" : "dcov2_affine";
    } else if (correlation) {
        value = dcor(x, y, metric);
        quantity = "dcor";
    } else if (o.estimator == "u") {
        value = dcov_u(x, y, metric).v2;
        quantity = "dcov2_u";
    } else if (o.estimator == "v") {
        value = dcov_v(x, y, metric).v2;
        quantity = "dcov2_v";
    } else {
        throw usage_error("--estimator must be v or u");
    }
    std::optional<TestResult> test;
    if (o.method == "perm") {
        if (o.metric != "euclidean" || o.affine || !o.z_cols.empty() || o.feuerverger || o.screen > 0) {
            throw usage_error("--method perm tests n V^2 with the euclidean metric only");
        }
        test = permutation_pvalue(x, y, o.boot, o.seed, o.alpha);
    }
    if (quantity != "screen") {
        j["quantity"] = quantity;
        j["value"] = value;
    }
    if (test) j["test"] = to_json(*test, std::nullopt, o.alpha);

    if (o.format == "json") return dump(j);
    std::ostringstream out;
    out << "quantity,value,p_value,B,seed\n";
    if (quantity == "screen") {
        out << "screen,";
        for (std::size_t k = 0; k < j["selected_columns"].size(); ++k) {
            out << (k ? " " : "") << j["selected_columns"][k].get<int>();
        }
        out << ",,,\n";
    } else {
        out << quantity << ',' << format_double(value) << ',';
        if (test) out << format_double(test->p_value) << ',' << test->B_used << ',' << test->seed;
        else out << ",,";
        out << '\n';
    }
    return out.str();
}

struct TestRun {
    TestResult result;
    std::optional<double> lambda;
};

inline std::vector<TestRun> run_tests(const Options& o, const MultiSeries& data) {
    if (o.stats.empty()) throw usage_error("test needs --stat");
    if (!o.method.empty() && o.method != "boot") throw usage_error("test calibrates by --method boot only");
    reject_flag(o.has_block, "--block", "test");
    const KernelSpec kernel = parse_kernel(o.kernel);
    std::vector<std::optional<double>> lambdas;
    const std::vector<int> ps = bandwidths_for(o, data.rows(), lambdas);
    ResamplingPlan plan;
    plan.B = o.boot;
    plan.seed = o.seed;
    std::vector<TestRun> out;
    for (const auto& name : o.stats) {
        StatisticKind kind;
        try {
            kind = parse_statistic(name);
        } catch (const std::invalid_argument& e) {
            throw usage_error(e.what());
        }
        if (kind == StatisticKind::Feuerverger || kind == StatisticKind::nV2) {
            throw usage_error(std::string(statistic_name(kind)) + " is not a serial statistic; use dcov");
        }
        for (std::size_t k = 0; k < ps.size(); ++k) {
            if (is_multivariate(kind)) {
                if (o.column != 0) throw usage_error("--column selects a single component; multivariate statistics use all");
                out.push_back({iid_bootstrap_pvalue(kind, data, kernel, ps[k], plan, o.alpha), lambdas[k]});
            } else {
                const std::size_t c = o.column == 0 ? 1 : static_cast<std::size_t>(o.column);
                if (c > data.dim()) throw data_error("--column " + std::to_string(c) + " not in file");
                if (o.column == 0 && data.dim() > 1) {
                    throw usage_error("univariate statistic on a multi-column input needs --column");
                }
                out.push_back({iid_bootstrap_pvalue(kind, data.component(c - 1), kernel, ps[k], plan, o.alpha),
                               lambdas[k]});
            }
        }
    }
    return out;
}

inline Json tests_json(const std::vector<TestRun>& runs, double alpha) {
    Json arr = Json::array();
    for (const auto& r : runs) arr.push_back(to_json(r.result, r.lambda, alpha));
    return arr;
}

inline void tests_csv(std::ostream& out, const std::vector<TestRun>& runs, const std::string& prefix) {
    for (const auto& r : runs) {
        out << prefix << statistic_name(r.result.statistic.name) << ',' << r.result.statistic.p << ','
            << (r.lambda ? format_double(*r.lambda) : "") << ','
            << (r.result.statistic.kernel ? kernel_name(r.result.statistic.kernel->kind) : "") << ','
            << format_double(r.result.statistic.value) << ',' << format_double(r.result.p_value) << ','
            << r.result.B_used << ','
            << (r.result.critical_value ? format_double(*r.result.critical_value) : "") << ',' << r.result.seed
            << '\n';
    }
}

inline const char* kTestCsvHeader = "statistic,p,lambda,kernel,value,p_value,B,critical_value,seed";

inline std::string run_test(const Options& o) {
    check_format(o);
    const MultiSeries data = read_series(o.file, {o.log, o.diff});
    const auto runs = run_tests(o, data);
    if (o.format == "json") {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = "test";
        j["n"] = data.rows();
        j["results"] = tests_json(runs, o.alpha);
        return dump(j);
    }
    std::ostringstream out;
    out << kTestCsvHeader << '\n';
    tests_csv(out, runs, "");
    return out.str();
}

inline std::string run_adcf(const Options& o) {
    check_format(o);
    if (!o.method.empty() && o.method != "subsample" && o.method != "wild") {
        throw usage_error("adcf bands use --method subsample or --method wild");
    }
    if (o.has_block && o.method != "subsample") throw usage_error("--block needs --method subsample");
    if (o.has_block && o.block < 2) throw usage_error("--block must be at least 2");
    const MultiSeries data = read_series(o.file, {o.log, o.diff});
    const int max_lag = o.has_lags ? o.lags : default_max_lag(data.rows());
    BandsPlan plan;
    plan.pairwise = o.method.empty() || o.method == "subsample";
    plan.simultaneous = o.method.empty() || o.method == "wild";
    plan.B = o.boot;
    plan.seed = o.seed;
    plan.level = 1.0 - o.alpha;
    if (o.has_block) plan.block = o.block;
    const PlotData plot = adcf_plot_data(data, max_lag, plan);
    return o.format == "json" ? dump(to_json(plot)) : plot_to_csv(plot);
}

inline std::string run_var(const Options& o, const Options* then) {
    check_format(o);
    reject_flag(o.has_block, "--block", "var");
    const MultiSeries data = read_series(o.file, {o.log, o.diff});
    std::vector<double> aic;
    int order = 0;
    if (o.order == "auto") {
        aic = var_aic(data, o.max_order);
        order = var_order_select(data, o.max_order);
    } else {
        try {
            std::size_t used = 0;
            order = std::stoi(o.order, &used);
            if (used != o.order.size()) throw std::invalid_argument("order");
        } catch (const std::exception&) {
            throw usage_error("--order must be 'auto' or a positive integer");
        }
        if (order < 1) throw usage_error("--order must be at least 1");
    }
    const VarModel model = var_fit(data, order);
    const MultiSeries residuals(model.residuals, data.labels());
    if (!o.residuals_out.empty()) write_text(o.residuals_out, series_to_csv(residuals));
    std::vector<TestRun> runs;
    if (then) runs = run_tests(*then, residuals);

    if (o.format == "json") {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = "var";
        j["n"] = data.rows();
        j["order"] = order;
        if (!aic.empty()) j["aic"] = aic;
        j["n_residuals"] = residuals.rows();
        std::vector<double> intercept(model.intercept.data(), model.intercept.data() + model.intercept.size());
        j["intercept"] = intercept;
        Json coefs = Json::array();
        for (const auto& phi : model.coefficients) {
            Json rows = Json::array();
            for (Eigen::Index r = 0; r < phi.rows(); ++r) {
                std::vector<double> row(static_cast<std::size_t>(phi.cols()));
                for (Eigen::Index c = 0; c < phi.cols(); ++c) row[static_cast<std::size_t>(c)] = phi(r, c);
                rows.push_back(row);
            }
            coefs.push_back(rows);
        }
        j["coefficients"] = coefs;
        if (then) j["tests"] = tests_json(runs, then->alpha);
        return dump(j);
    }
    std::ostringstream out;
    out << "order," << kTestCsvHeader << '\n';
    if (runs.empty()) out << order << ",,,,,,,,,\n";
    tests_csv(out, runs, std::to_string(order) + ",");
    return out.str();
}

inline std::string run_simulate(const Options& o) {
    check_format(o);
    reject_flag(o.has_block, "--block", "simulate");
    if (!o.method.empty() && o.method != "boot") throw usage_error("simulate calibrates by --method boot only");
    if (o.has_bandwidth) throw usage_error("simulate sets bandwidths through --lambda");
    ExperimentConfig config;
    config.models.clear();
    if (o.models.empty()) throw usage_error("simulate needs --model");
    for (const auto& m : o.models) {
        try {
            config.models.push_back(ModelSpec::of(parse_model(m)));
        } catch (const std::invalid_argument& e) {
            throw usage_error(e.what());
        }
    }
    config.sample_sizes = o.sizes;
    if (!o.lambdas.empty()) config.lambdas = o.lambdas;
    if (!o.stats.empty()) {
        config.statistics.clear();
        for (const auto& s : o.stats) {
            try {
                config.statistics.push_back(parse_statistic(s));
            } catch (const std::invalid_argument& e) {
                throw usage_error(e.what());
            }
        }
    }
    config.B = o.full_scale && !o.has_boot ? 499 : o.boot;
    config.experiments = o.full_scale && !o.has_experiments ? 1000 : o.experiments;
    config.alpha = o.alpha;
    config.seed = o.seed;
    config.kernel = parse_kernel(o.kernel);
    config.bandwidth_constant = o.constant;
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
    const ExperimentReport report = run_experiment(config);
    std::clog << "simulate: " << report.rows.size() << " cells in " << report.runtime_seconds << " s\n";
    return o.format == "json" ? dump(to_json(report)) : report_to_csv(report);
}

// Parsing ----------------------------------------------------------------------------------

inline void add_shared(CLI::App* app, Options& o) {
    app->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    auto* boot = app->add_option("--boot", o.boot, "Resampling replicates")->capture_default_str()->check(CLI::PositiveNumber);
    auto* kernel = app->add_option("--kernel", o.kernel, "Lag window")->check(CLI::IsMember({"bartlett", "parzen", "daniell"}));
    kernel->capture_default_str();
    auto* lambda = app->add_option("--lambda", o.lambdas, "Bandwidth exponent(s): p = ceil(c n^lambda)")->delimiter(',');
    auto* bw = app->add_option("--bandwidth", o.bandwidth, "Bandwidth p");
    lambda->excludes(bw);
    app->add_option("--constant", o.constant, "Bandwidth constant c")->capture_default_str();
    auto* lags = app->add_option("--lags", o.lags, "Maximum lag")->check(CLI::PositiveNumber);
    auto* alpha = app->add_option("--alpha", o.alpha, "Significance level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    app->add_option("--method", o.method, "Calibration method")->check(CLI::IsMember({"perm", "boot", "wild", "subsample"}));
    auto* block = app->add_option("--block", o.block, "Subsampling block length");
    app->add_option("--out", o.out, "Output file (default stdout)");
    app->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app->add_flag("--log", o.log, "Natural log of the input");
    app->add_flag("--diff", o.diff, "First difference of the input (after --log)");
    app->parse_complete_callback([&o, lambda, bw, lags, block, boot, alpha] {
        o.has_lambda = lambda->count() > 0;
        o.has_bandwidth = bw->count() > 0;
        o.has_lags = lags->count() > 0;
        o.has_block = block->count() > 0;
        o.has_boot = boot->count() > 0;
        o.has_alpha = alpha->count() > 0;
    });
}

inline void add_dcov_flags(CLI::App* app, Options& o, bool correlation) {
    app->add_option("file", o.file, "CSV input")->required();
    app->add_option("--x", o.x_cols, "Columns of X (1-based)")->delimiter(',');
    app->add_option("--y", o.y_cols, "Columns of Y (1-based)")->delimiter(',');
    app->add_option("--metric", o.metric, "Distance")->check(CLI::IsMember({"euclidean", "alpha", "gaussian", "hsic"}));
    app->add_option("--exponent", o.exponent, "Exponent of the alpha-power distance");
    app->add_option("--sigma", o.sigma, "Scale of the gaussian-induced distance");
    app->add_flag("--affine", o.affine, "Affinely invariant version");
    app->add_flag("--feuerverger", o.feuerverger, "Rank-based normal-scores statistic n V^2");
    if (correlation) {
        app->add_option("--z", o.z_cols, "Columns to partial out")->delimiter(',');
        app->add_option("--screen", o.screen, "Keep this many --x columns ranked by dcor with --y");
    } else {
        app->add_option("--estimator", o.estimator, "v (biased) or u (unbiased)")->check(CLI::IsMember({"v", "u"}));
    }
}

struct Parsed {
    std::string command;
    Options options;
};

inline std::unique_ptr<CLI::App> build_app(Parsed& parsed, bool residual_test) {
    auto app = std::make_unique<CLI::App>("Distance-based serial dependence tools", "serialdep");
    app->require_subcommand(1);
    Options& o = parsed.options;
    auto* dcov = app->add_subcommand("dcov", "Squared distance covariance of two column sets");
    auto* dcor = app->add_subcommand("dcor", "Distance correlation of two column sets");
    auto* test = app->add_subcommand("test", "Portmanteau test with bootstrap p-value");
    auto* adcf = app->add_subcommand("adcf", "Auto-distance correlation with bands");
    auto* var = app->add_subcommand("var", "VAR fit and residual diagnostics (chain with --then test ...)");
    auto* sim = app->add_subcommand("simulate", "Monte-Carlo size and power experiment");
    for (auto* s : {dcov, dcor, test, adcf, var, sim}) add_shared(s, o);
    add_dcov_flags(dcov, o, false);
    add_dcov_flags(dcor, o, true);

    auto* file = test->add_option("file", o.file, "CSV input");
    if (!residual_test) file->required();
    test->add_option("--stat", o.stats, "Statistic name(s)")->delimiter(',');
    test->add_option("--column", o.column, "Component for a univariate statistic (1-based)");

    adcf->add_option("file", o.file, "CSV input")->required();

    var->add_option("file", o.file, "CSV input")->required();
    var->add_option("--order", o.order, "VAR order or 'auto'")->capture_default_str();
    var->add_option("--max-order", o.max_order, "Largest order tried by AIC")->capture_default_str()->check(CLI::PositiveNumber);
    var->add_option("--residuals", o.residuals_out, "Write residuals to this CSV");

    sim->add_option("--model", o.models, "iid, nma2, ar1, arch2")->delimiter(',');
    sim->add_option("--n", o.sizes, "Sample size(s)")->delimiter(',');
    auto* exps = sim->add_option("--experiments", o.experiments, "Simulated series per cell")->check(CLI::PositiveNumber);
    sim->add_option("--stat", o.stats, "Statistic name(s)")->delimiter(',');
    sim->add_flag("--full-scale", o.full_scale, "1000 experiments and B = 499 unless given");
    sim->parse_complete_callback([&o, exps] { o.has_experiments = exps->count() > 0; });

    for (auto* s : {dcov, dcor, test, adcf, var, sim}) {
        s->callback([&parsed, s] { parsed.command = s->get_name(); });
    }
    return app;
}

/// Runs the tool on args (without the program name). Returns the exit code:
/// 0 success, 1 data error, 2 usage error.
inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    const auto then = std::find(args.begin(), args.end(), "--then");
    const std::vector<std::string> head(args.begin(), then);
    const std::vector<std::string> tail = then == args.end() ? std::vector<std::string>{}
                                                             : std::vector<std::string>(then + 1, args.end());
    Parsed main_parse, tail_parse;
    auto app = build_app(main_parse, false);
    auto tail_app = build_app(tail_parse, true);
    try {
        std::vector<std::string> rev(head.rbegin(), head.rend());
        app->parse(rev);
        if (then != args.end()) {
            if (main_parse.command != "var") throw usage_error("--then follows only the var command");
            std::vector<std::string> trev(tail.rbegin(), tail.rend());
            tail_app->parse(trev);
            if (tail_parse.command != "test") throw usage_error("--then must be followed by test");
            if (!tail_parse.options.file.empty()) throw usage_error("the chained test reads the VAR residuals, not a file");
            const std::string& tail_out = tail_parse.options.out;
            if (!tail_out.empty()) {
                if (!main_parse.options.out.empty() && main_parse.options.out != tail_out)
                    throw usage_error("--out given twice with different paths");
                main_parse.options.out = tail_out;
            }
        }
    } catch (const CLI::ParseError& e) {
        const int rc = app->exit(e, out, err);
        return rc == 0 ? 0 : 2;
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        const Options& o = main_parse.options;
        std::string text;
        if (main_parse.command == "dcov") text = run_dcov_like(o, false);
        else if (main_parse.command == "dcor") text = run_dcov_like(o, true);
        else if (main_parse.command == "test") text = run_test(o);
        else if (main_parse.command == "adcf") text = run_adcf(o);
        else if (main_parse.command == "var") text = run_var(o, then == args.end() ? nullptr : &tail_parse.options);
        else if (main_parse.command == "simulate") text = run_simulate(o);
        if (o.out.empty()) {
            out << text;
            out.flush();
        } else {
            write_text(o.out, text);
        }
        return 0;
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace serialdep::cli
