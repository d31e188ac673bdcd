#include "sigcwgan/metrics.hpp"

#include "sigcwgan/errors.hpp"

#include <cmath>

namespace sigcwgan {

double sig_w1(const SigStats& mu, const SigStats& nu) {
    if (mu.mean.size() != nu.mean.size()) {
        throw ShapeError("sig_w1: expected signatures differ in length (" +
                         std::to_string(mu.mean.size()) + " vs " +
                         std::to_string(nu.mean.size()) + ")");
    }
    if (mu.pipeline != nu.pipeline) {
        throw ShapeError("sig_w1: pipelines differ ('" + mu.pipeline + "' vs '" + nu.pipeline +
                         "')");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < mu.mean.size(); ++i) {
        const double diff = mu.mean[i] - nu.mean[i];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

double sig_mmd(const SigStats& mu, const SigStats& nu) {
    const double w = sig_w1(mu, nu);
    return w * w;
}

namespace {

// Mean of k(a, b) over all pairs of rows.
double mean_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double inv_two_var) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            sum += std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv_two_var);
        }
    }
    return sum / static_cast<double>(a.rows() * b.rows());
}

}  // namespace

double gaussian_mmd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    std::span<const double> bandwidths) {
    if (x.rows() == 0 || y.rows() == 0) {
        throw DomainError("gaussian_mmd: empty sample");
    }
    if (x.cols() != y.cols()) {
        throw ShapeError("gaussian_mmd: samples differ in dimension");
    }
    if (bandwidths.empty()) {
        throw DomainError("gaussian_mmd: no bandwidths");
    }
    double total = 0.0;
    for (double sigma : bandwidths) {
        if (!(sigma > 0.0)) {
            throw DomainError("gaussian_mmd: bandwidths must be positive");
        }
        const double inv = 1.0 / (2.0 * sigma * sigma);
        total += mean_kernel(x, x, inv) - 2.0 * mean_kernel(x, y, inv) + mean_kernel(y, y, inv);
    }
    // The V-statistic is a squared RKHS norm; clamp rounding noise.
    return total < 0.0 ? 0.0 : total;
}

}  // namespace sigcwgan
