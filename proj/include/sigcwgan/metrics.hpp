#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sigcwgan {

/// Expected truncated signature of a sample of paths.
struct SigStats {
    std::vector<double> mean;  // flattened expected signature
    std::size_t count = 1;
    std::string pipeline;      // TransformPipeline::describe() of the features
};

/// Truncated Sig-W1: the l2 distance between expected signatures. The
/// supremum over unit linear functionals of <l, a> is attained at l = a/|a|,
/// which is what collapses the dual problem to this norm.
/// Throws ShapeError on mismatched lengths or pipelines.
double sig_w1(const SigStats& mu, const SigStats& nu);

/// Square of sig_w1.
double sig_mmd(const SigStats& mu, const SigStats& nu);

/// Biased (V-statistic) squared MMD summed over Gaussian kernels
/// k(a, b) = exp(-|a-b|^2 / (2 sigma^2)), one per bandwidth.
/// Rows of x and y are samples.
double gaussian_mmd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    std::span<const double> bandwidths);

}  // namespace sigcwgan
