#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace sigcwgan {

/// Row-major view of a discrete path: row t is the observation at step t.
using Path = Eigen::MatrixXd;

/// A finite, regularly indexed d-dimensional real series.
struct TimeSeries {
    Eigen::MatrixXd values;  // T x d
    /// Optional time stamps; empty means 0..T-1.
    std::vector<double> time;

    TimeSeries() = default;
    explicit TimeSeries(Eigen::MatrixXd v) : values(std::move(v)) {}

    std::size_t length() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
    double time_at(std::size_t t) const {
        return time.empty() ? static_cast<double>(t) : time[t];
    }
};

}  // namespace sigcwgan
