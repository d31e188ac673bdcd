#include "sigcwgan/evalsuite.hpp"

#include "sigcwgan/errors.hpp"
#include "sigcwgan/metrics.hpp"
#include "sigcwgan/sigregress.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

namespace sigcwgan {

namespace {

std::size_t common_dim(std::span<const Path> a, std::span<const Path> b, const char* op) {
    if (a.empty() || b.empty()) {
        throw DomainError(std::string(op) + ": empty window set");
    }
    const Eigen::Index d = a.front().cols();
    for (const auto& w : a) {
        if (w.cols() != d) throw ShapeError(std::string(op) + ": windows differ in dimension");
    }
    for (const auto& w : b) {
        if (w.cols() != d) throw ShapeError(std::string(op) + ": windows differ in dimension");
    }
    return static_cast<std::size_t>(d);
}

std::vector<double> column_values(std::span<const Path> windows, std::size_t dim) {
    std::vector<double> values;
    for (const auto& w : windows) {
        for (Eigen::Index t = 0; t < w.rows(); ++t) {
            values.push_back(w(t, static_cast<Eigen::Index>(dim)));
        }
    }
    return values;
}

struct Histograms {
    double lo;
    double width;
    std::vector<std::int64_t> real_count;
    std::vector<std::int64_t> synth_count;

    double real_mass(std::size_t b) const {
        return static_cast<double>(real_count[b]) / static_cast<double>(real_total());
    }
    double synth_mass(std::size_t b) const {
        return static_cast<double>(synth_count[b]) / static_cast<double>(synth_total());
    }
    std::int64_t real_total() const {
        return std::accumulate(real_count.begin(), real_count.end(), std::int64_t{0});
    }
    std::int64_t synth_total() const {
        return std::accumulate(synth_count.begin(), synth_count.end(), std::int64_t{0});
    }

    /// l1 distance of the bin masses. Summed over integers and divided once,
    /// so disjoint samples give exactly 2 rather than 2 plus rounding.
    double l1() const {
        const std::int64_t nr = real_total(), ns = synth_total();
        std::int64_t total = 0;
        for (std::size_t b = 0; b < real_count.size(); ++b) {
            total += std::abs(real_count[b] * ns - synth_count[b] * nr);
        }
        return static_cast<double>(total) / (static_cast<double>(nr) * static_cast<double>(ns));
    }
};

Histograms histograms(const std::vector<double>& real, const std::vector<double>& synth,
                      std::size_t bins) {
    if (bins < 1) {
        throw DomainError("histogram: bins must be positive");
    }
    if (real.empty() || synth.empty()) {
        throw DomainError("histogram: empty sample");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : real) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : synth) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("histogram: non-finite samples");
    }
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    auto count = [&](const std::vector<double>& values) {
        std::vector<std::int64_t> counts(bins, 0);
        for (double v : values) {
            auto bin = static_cast<std::size_t>((v - lo) / width);
            ++counts[std::min(bin, bins - 1)];
        }
        return counts;
    };
    return {lo, width, count(real), count(synth)};
}

std::vector<double> lag_ratio_per_dim(std::span<const Path> windows, std::size_t dims,
                                      std::size_t lag) {
    std::vector<double> out(dims);
    for (std::size_t i = 0; i < dims; ++i) {
        const double var = pooled_autocovariance(windows, i, 0);
        if (!(var > 0.0)) {
            throw DomainError("acf: zero variance in dimension " + std::to_string(i));
        }
        out[i] = pooled_autocovariance(windows, i, lag) / var;
    }
    return out;
}

Eigen::MatrixXd correlation_from_rows(const Eigen::MatrixXd& rows) {
    const double n = static_cast<double>(rows.rows());
    const Eigen::RowVectorXd mean = rows.colwise().sum() / n;
    const Eigen::MatrixXd cov =
        (rows.transpose() * rows) / n - mean.transpose() * mean;
    const Eigen::VectorXd var = cov.diagonal();
    for (Eigen::Index i = 0; i < var.size(); ++i) {
        if (!(var(i) > 0.0)) {
            throw DomainError("correlation: zero variance in feature " + std::to_string(i));
        }
    }
    const Eigen::VectorXd inv_sd = var.array().sqrt().inverse();
    return inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
}

Eigen::MatrixXd stack_rows(std::span<const Path> windows) {
    Eigen::Index total = 0;
    for (const auto& w : windows) total += w.rows();
    Eigen::MatrixXd rows(total, windows.front().cols());
    Eigen::Index at = 0;
    for (const auto& w : windows) {
        rows.middleRows(at, w.rows()) = w;
        at += w.rows();
    }
    return rows;
}

}  // namespace

std::vector<double> marginal_metric_per_dim(std::span<const Path> real_windows,
                                            std::span<const Path> synth_windows,
                                            std::size_t bins) {
    const std::size_t dims = common_dim(real_windows, synth_windows, "marginal_metric");
    std::vector<double> out(dims);
    for (std::size_t i = 0; i < dims; ++i) {
        const auto h = histograms(column_values(real_windows, i),
                                  column_values(synth_windows, i), bins);
        out[i] = h.l1();
    }
    return out;
}

double marginal_metric(std::span<const Path> real_windows, std::span<const Path> synth_windows,
                       std::size_t bins) {
    const auto per_dim = marginal_metric_per_dim(real_windows, synth_windows, bins);
    double sum = 0.0;
    for (double v : per_dim) sum += v;
    return sum / static_cast<double>(per_dim.size());
}

double pooled_autocovariance(std::span<const Path> windows, std::size_t dim, std::size_t lag) {
    double sum_ab = 0.0;
    double sum_a = 0.0;
    double sum_b = 0.0;
    std::size_t n = 0;
    const auto k = static_cast<Eigen::Index>(lag);
    const auto col = static_cast<Eigen::Index>(dim);
    for (const auto& w : windows) {
        for (Eigen::Index s = 0; s + k < w.rows(); ++s) {
            const double a = w(s, col);
            const double b = w(s + k, col);
            sum_ab += a * b;
            sum_a += a;
            sum_b += b;
            ++n;
        }
    }
    if (n == 0) {
        throw DomainError("pooled_autocovariance: windows are too short for lag " +
                          std::to_string(lag));
    }
    const double inv = 1.0 / static_cast<double>(n);
    return sum_ab * inv - (sum_a * inv) * (sum_b * inv);
}

std::vector<double> series_lag1_autocorrelation(const TimeSeries& x) {
    const Eigen::Index T = x.values.rows();
    if (T < 2) {
        throw DomainError("series_lag1_autocorrelation: need at least two observations");
    }
    std::vector<double> out(x.dim());
    for (Eigen::Index i = 0; i < x.values.cols(); ++i) {
        const Eigen::VectorXd c = x.values.col(i).array() - x.values.col(i).mean();
        const double rho0 = c.squaredNorm() / static_cast<double>(T);
        const double rho1 =
            c.head(T - 1).dot(c.tail(T - 1)) / static_cast<double>(T - 1);
        if (!(rho0 > 0.0)) {
            throw DomainError("acf: zero variance in dimension " + std::to_string(i));
        }
        out[static_cast<std::size_t>(i)] = rho1 / rho0;
    }
    return out;
}

std::vector<double> acf_metric_per_dim(std::span<const Path> real_windows,
                                       std::span<const Path> synth_windows) {
    const std::size_t dims = common_dim(real_windows, synth_windows, "acf_metric");
    const auto real = lag_ratio_per_dim(real_windows, dims, 1);
    const auto synth = lag_ratio_per_dim(synth_windows, dims, 1);
    std::vector<double> out(dims);
    for (std::size_t i = 0; i < dims; ++i) {
        out[i] = std::abs(real[i] - synth[i]);
    }
    return out;
}

double acf_metric(std::span<const Path> real_windows, std::span<const Path> synth_windows) {
    const auto per_dim = acf_metric_per_dim(real_windows, synth_windows);
    double sum = 0.0;
    for (double v : per_dim) sum += v;
    return sum / static_cast<double>(per_dim.size());
}

double acf_metric(const TimeSeries& real, std::span<const Path> synth_windows) {
    if (synth_windows.empty()) {
        throw DomainError("acf_metric: empty synthetic set");
    }
    const auto r = series_lag1_autocorrelation(real);
    const auto s = lag_ratio_per_dim(synth_windows, real.dim(), 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) sum += std::abs(r[i] - s[i]);
    return sum / static_cast<double>(r.size());
}

Eigen::MatrixXd pooled_correlation(std::span<const Path> windows) {
    if (windows.empty()) {
        throw DomainError("pooled_correlation: no windows");
    }
    return correlation_from_rows(stack_rows(windows));
}

double cross_corr_metric(std::span<const Path> real_windows, std::span<const Path> synth_windows) {
    const std::size_t dims = common_dim(real_windows, synth_windows, "cross_corr_metric");
    if (dims < 2) {
        return 0.0;
    }
    return (pooled_correlation(real_windows) - pooled_correlation(synth_windows))
        .cwiseAbs()
        .sum();
}

double cross_corr_metric(const TimeSeries& real, std::span<const Path> synth_windows) {
    if (synth_windows.empty()) {
        throw DomainError("cross_corr_metric: empty synthetic set");
    }
    if (real.dim() < 2) {
        return 0.0;
    }
    return (correlation_from_rows(real.values) - pooled_correlation(synth_windows))
        .cwiseAbs()
        .sum();
}

TstrResult tstr_r2(const TimeSeries& real, const WindowSampler& sampler, std::size_t p,
                   const TransformPipeline& past_pipeline, double ridge, double train_fraction) {
    const auto windows = make_windows(real, p, 1);
    const std::size_t n = windows.size();
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    if (n_train < 2 || n - n_train < 2) {
        throw DomainError("tstr_r2: insufficient data for a train/test split (" +
                          std::to_string(n) + " pairs)");
    }
    const std::span<const Window> all(windows);
    const auto train = all.first(n_train);
    const auto test = all.subspan(n_train);

    const Eigen::MatrixXd x_train = past_feature_matrix(train, past_pipeline);
    const Eigen::MatrixXd x_test = past_feature_matrix(test, past_pipeline);
    const auto d = static_cast<Eigen::Index>(real.dim());
    auto next_values = [d](std::span<const Path> futures) {
        Eigen::MatrixXd y(static_cast<Eigen::Index>(futures.size()), d);
        for (std::size_t i = 0; i < futures.size(); ++i) {
            y.row(static_cast<Eigen::Index>(i)) = futures[i].row(0);
        }
        return y;
    };
    const auto real_train_futures = futures_of(train);
    const auto real_test_futures = futures_of(test);
    const Eigen::MatrixXd y_train = next_values(real_train_futures);
    const Eigen::MatrixXd y_test = next_values(real_test_futures);

    const double lambda = ridge >= 0.0 ? ridge : default_ridge(x_train);
    TstrResult result;
    result.trtr = r_squared(y_test, predict_rows(fit(x_train, y_train, lambda), x_test));

    const auto synth = sampler(train);
    if (synth.size() != train.size()) {
        throw ShapeError("tstr_r2: sampler returned the wrong number of windows");
    }
    const Eigen::MatrixXd y_synth = next_values(synth);
    result.tstr = r_squared(y_test, predict_rows(fit(x_train, y_synth, lambda), x_test));
    return result;
}

EvalReport full_report(const TimeSeries& real, const WindowSampler& sampler,
                       const EvalConfig& config) {
    const auto windows = make_windows(real, config.p, config.q);
    const auto real_futures = futures_of(windows);
    const auto synth_futures = sampler(windows);
    if (synth_futures.size() != windows.size()) {
        throw ShapeError("full_report: sampler returned the wrong number of windows");
    }

    EvalReport report;
    report.dataset = config.dataset;
    report.marginal_per_dim = marginal_metric_per_dim(real_futures, synth_futures, config.bins);
    for (double v : report.marginal_per_dim) report.marginal += v;
    report.marginal /= static_cast<double>(report.marginal_per_dim.size());
    report.acf_per_dim = acf_metric_per_dim(real_futures, synth_futures);
    for (double v : report.acf_per_dim) report.acf += v;
    report.acf /= static_cast<double>(report.acf_per_dim.size());
    report.cross_corr = cross_corr_metric(real_futures, synth_futures);
    if (real.dim() < 2) {
        report.notes.push_back("cross-correlation metric is 0 for one-dimensional data");
    }

    const auto tstr = tstr_r2(real, sampler, config.p, config.past_pipeline, config.ridge);
    report.trtr_r2 = tstr.trtr;
    report.tstr_r2 = tstr.tstr;
    report.r2_relative_error = std::abs(tstr.tstr - tstr.trtr) / std::abs(tstr.trtr);

    const std::string descriptor = config.future_pipeline.describe();
    const SigStats real_stats{expected_signature(real_futures, config.future_pipeline),
                              real_futures.size(), descriptor};
    const SigStats synth_stats{expected_signature(synth_futures, config.future_pipeline),
                               synth_futures.size(), descriptor};
    report.sig_w1 = sig_w1(real_stats, synth_stats);

    report.config = {{"p", config.p},
                     {"q", config.q},
                     {"past_pipeline", config.past_pipeline.describe()},
                     {"future_pipeline", descriptor},
                     {"bins", config.bins},
                     {"ridge", config.ridge},
                     {"train_fraction", 0.8}};
    return report;
}

nlohmann::json report_to_json(const EvalReport& r) {
    return {{"format", "sigcwgan-report"},
            {"version", 1},
            {"dataset", r.dataset},
            {"marginal", r.marginal},
            {"acf", r.acf},
            {"cross_corr", r.cross_corr},
            {"trtr_r2", r.trtr_r2},
            {"tstr_r2", r.tstr_r2},
            {"r2_relative_error", r.r2_relative_error},
            {"sig_w1", r.sig_w1},
            {"marginal_per_dim", r.marginal_per_dim},
            {"acf_per_dim", r.acf_per_dim},
            {"notes", r.notes},
            {"config", r.config}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "sigcwgan-report") {
            throw CorruptFileError("not a report file");
        }
        if (j.at("version").get<int>() != 1) {
            throw VersionError("unsupported report version " + j.at("version").dump());
        }
        EvalReport r;
        r.dataset = j.at("dataset").get<std::string>();
        r.marginal = j.at("marginal").get<double>();
        r.acf = j.at("acf").get<double>();
        r.cross_corr = j.at("cross_corr").get<double>();
        r.trtr_r2 = j.at("trtr_r2").get<double>();
        r.tstr_r2 = j.at("tstr_r2").get<double>();
        r.r2_relative_error = j.at("r2_relative_error").get<double>();
        r.sig_w1 = j.at("sig_w1").get<double>();
        r.marginal_per_dim = j.at("marginal_per_dim").get<std::vector<double>>();
        r.acf_per_dim = j.at("acf_per_dim").get<std::vector<double>>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
        r.config = j.at("config");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("malformed report: ") + e.what());
    }
}

void write_report(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write report to " + path);
    }
    out << report_to_json(report).dump(2) << '\n';
}

EvalReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw CorruptFileError("cannot open report " + path);
    }
    try {
        return report_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError("report " + path + ": " + e.what());
    }
}

std::vector<HistogramRow> histogram_table(std::span<const Path> real_windows,
                                          std::span<const Path> synth_windows,
                                          std::size_t bins) {
    const std::size_t dims = common_dim(real_windows, synth_windows, "histogram_table");
    std::vector<HistogramRow> rows;
    for (std::size_t i = 0; i < dims; ++i) {
        const auto h = histograms(column_values(real_windows, i),
                                  column_values(synth_windows, i), bins);
        for (std::size_t b = 0; b < bins; ++b) {
            rows.push_back({i, h.lo + (static_cast<double>(b) + 0.5) * h.width,
                            h.real_mass(b) / h.width, h.synth_mass(b) / h.width});
        }
    }
    return rows;
}

std::vector<AcfRow> acf_table(std::span<const Path> real_windows,
                              std::span<const Path> synth_windows) {
    const std::size_t dims = common_dim(real_windows, synth_windows, "acf_table");
    const auto max_lag = static_cast<std::size_t>(
        std::min(real_windows.front().rows(), synth_windows.front().rows()) - 1);
    std::vector<AcfRow> rows;
    for (std::size_t i = 0; i < dims; ++i) {
        const double real0 = pooled_autocovariance(real_windows, i, 0);
        const double synth0 = pooled_autocovariance(synth_windows, i, 0);
        for (std::size_t k = 0; k <= max_lag; ++k) {
            rows.push_back({i, k, pooled_autocovariance(real_windows, i, k) / real0,
                            pooled_autocovariance(synth_windows, i, k) / synth0});
        }
    }
    return rows;
}

}  // namespace sigcwgan
