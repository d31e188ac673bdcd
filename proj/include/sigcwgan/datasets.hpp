#pragma once

#include "sigcwgan/timeseries.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sigcwgan {

/// X_{t+1} = phi X_t + eps_{t+1}, eps ~ N(0, sigma 1 1' + (1 - sigma) I).
struct VarSpec {
    std::size_t dim = 1;
    double phi = 0.8;
    double sigma = 0.8;
    std::size_t length = 10000;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Engle ARCH(p): X_t = s_t e_t, s_t^2 = alpha0 + sum_i alpha_i X_{t-i}^2,
/// e_t iid N(0, 1). Defaults alpha0 = 0.2, alpha_i = 0.6 / p.
struct ArchSpec {
    std::size_t order = 3;
    double alpha0 = 0.2;
    std::vector<double> alphas = {0.2, 0.2, 0.2};
    std::size_t length = 10000;
    std::uint64_t seed = 0;

    static ArchSpec with_order(std::size_t order);
    void validate() const;
};

/// X_1 is drawn from the stationary law (covariance Sigma / (1 - phi^2)) when
/// |phi| < 1, otherwise the path starts at 0. The noise is built as
/// sqrt(sigma) g0 1 + sqrt(1 - sigma) g, which has the required covariance
/// without a factorisation and stays valid at sigma = 1.
TimeSeries var1_simulate(const VarSpec& spec);

/// Simulates with 500 burn-in steps discarded; pre-sample values are 0.
TimeSeries arch_simulate(const ArchSpec& spec);

inline constexpr std::size_t kArchBurnIn = 500;

enum class IngestMode { LogReturn, Log, Raw };

struct CsvColumn {
    std::string name;
    IngestMode mode = IngestMode::LogReturn;
};

IngestMode parse_ingest_mode(const std::string& text);
std::string to_string(IngestMode mode);

struct IngestResult {
    TimeSeries series;
    std::size_t dropped_rows = 0;
};

/// Reads a headed, comma-separated file and maps the requested columns:
/// LogReturn gives ln(p_t / p_{t-1}), Log gives ln(v_t), Raw copies. Rows
/// with a missing or unparsable value in any requested column are dropped
/// (and counted) before the transforms are applied.
IngestResult ingest_csv(const std::string& path, const std::vector<CsvColumn>& columns);

/// Header "t,x0,...,x{d-1}"; values in shortest round-trip form.
void write_series_csv(const std::string& path, const TimeSeries& series);
TimeSeries read_series_csv(const std::string& path);

}  // namespace sigcwgan
