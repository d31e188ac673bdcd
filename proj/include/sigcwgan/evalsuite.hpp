#pragma once

#include "sigcwgan/signature.hpp"
#include "sigcwgan/timeseries.hpp"
#include "sigcwgan/windows.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sigcwgan {

/// Histogram-based marginal distance.
///
/// For each dimension both samples (all window entries) are binned on the
/// common range [min, max] of their union and normalised to densities; the
/// per-dimension value is sum |f_real - f_synth| * bin_width, which lies in
/// [0, 2]. The result is the mean over dimensions.
double marginal_metric(std::span<const Path> real_windows, std::span<const Path> synth_windows,
                       std::size_t bins = 50);
std::vector<double> marginal_metric_per_dim(std::span<const Path> real_windows,
                                            std::span<const Path> synth_windows,
                                            std::size_t bins = 50);

/// Lag-k autocovariance pooled over windows: pairs (w[s], w[s+k]) for every
/// window w and every s with s + k inside the window,
///   mean(a b) - mean(a) mean(b).
double pooled_autocovariance(std::span<const Path> windows, std::size_t dim, std::size_t lag);

/// rho(1) / rho(0) of a single series, with the (1/(T-k)) sum of centred
/// products as rho(k).
std::vector<double> series_lag1_autocorrelation(const TimeSeries& x);

/// Mean over dimensions of |acf_real(1) - acf_synth(1)| with both sides
/// estimated by pooling within windows. Throws DomainError on zero variance.
double acf_metric(std::span<const Path> real_windows, std::span<const Path> synth_windows);
std::vector<double> acf_metric_per_dim(std::span<const Path> real_windows,
                                       std::span<const Path> synth_windows);
/// Variant whose real side uses the whole-series estimator.
double acf_metric(const TimeSeries& real, std::span<const Path> synth_windows);

/// Correlation matrix of all window rows pooled together.
Eigen::MatrixXd pooled_correlation(std::span<const Path> windows);

/// Entrywise l1 distance between the pooled feature correlation matrices.
/// Returns 0 for d = 1.
double cross_corr_metric(std::span<const Path> real_windows, std::span<const Path> synth_windows);
/// Variant whose real side uses the whole series.
double cross_corr_metric(const TimeSeries& real, std::span<const Path> synth_windows);

struct TstrResult {
    double trtr = 0.0;
    double tstr = 0.0;
};

/// Next-step usefulness test. Pairs (past p-window, next value) are split
/// 80/20 in time order; a ridge regression on past signature features is
/// fitted on the real training pairs (TRTR) and on the same pasts with
/// sampler-generated next values (TSTR); both are scored by R^2 on the real
/// test pairs. ridge < 0 selects default_ridge.
TstrResult tstr_r2(const TimeSeries& real, const WindowSampler& sampler, std::size_t p,
                   const TransformPipeline& past_pipeline, double ridge = -1.0,
                   double train_fraction = 0.8);

struct EvalConfig {
    std::size_t p = 3;
    std::size_t q = 3;
    TransformPipeline past_pipeline = default_pipeline(2);
    TransformPipeline future_pipeline = default_pipeline(2);
    std::size_t bins = 50;
    double ridge = -1.0;
    std::string dataset;
};

struct EvalReport {
    double marginal = 0.0;
    double acf = 0.0;
    double cross_corr = 0.0;
    double trtr_r2 = 0.0;
    double tstr_r2 = 0.0;
    double r2_relative_error = 0.0;
    double sig_w1 = 0.0;
    std::vector<double> marginal_per_dim;
    std::vector<double> acf_per_dim;
    std::string dataset;
    std::vector<std::string> notes;
    nlohmann::json config;

    bool operator==(const EvalReport&) const = default;
};

/// Runs every metric on the real windows of `real` against one synthetic
/// future per window drawn from `sampler`.
EvalReport full_report(const TimeSeries& real, const WindowSampler& sampler,
                       const EvalConfig& config);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
void write_report(const std::string& path, const EvalReport& report);
EvalReport read_report(const std::string& path);

/// Rows: dimension, bin centre, real density, synthetic density.
struct HistogramRow {
    std::size_t dim;
    double centre;
    double real_density;
    double synth_density;
};
std::vector<HistogramRow> histogram_table(std::span<const Path> real_windows,
                                          std::span<const Path> synth_windows,
                                          std::size_t bins);

/// Rows: dimension, lag, real autocorrelation, synthetic autocorrelation.
struct AcfRow {
    std::size_t dim;
    std::size_t lag;
    double real;
    double synth;
};
std::vector<AcfRow> acf_table(std::span<const Path> real_windows,
                              std::span<const Path> synth_windows);

}  // namespace sigcwgan
