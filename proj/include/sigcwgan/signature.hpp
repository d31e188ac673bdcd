#pragma once

#include "sigcwgan/tensor.hpp"
#include "sigcwgan/timeseries.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sigcwgan {

// Path transformations. All take a T x d path (one observation per row).

/// Prepends a zero row and a leading time channel t/(T-1) (0 when T = 1).
/// Output is (T+1) x (d+1).
Path time_augment(const Path& x);

/// Prepends a zero row; dimension unchanged.
Path basepoint_zero(const Path& x);

/// Concatenates each row with the running sum of rows up to and including it.
/// Output is T x 2d.
Path cumulative_sum_concat(const Path& x);

/// Lead-lag interleaving, (2T-1) x 2d. Even row 2i is (x_i, x_i); odd row
/// 2i+1 is (x_{i+1}, x_i), i.e. the lead half moves first.
Path lead_lag(const Path& x);

/// m-lag added path: row t is (x_t, ..., x_{t+m}); output (T-m) x d(m+1).
Path lag_add(const Path& x, std::size_t m);

enum class TransformKind { TimeAugment, BasepointZero, CumulativeSumConcat, LagAdd, LeadLag };

struct TransformStep {
    TransformKind kind;
    std::size_t lag = 0;  // only for LagAdd

    bool operator==(const TransformStep&) const = default;
};

/// Ordered list of transformations followed by a truncated signature of degree `degree`.
struct TransformPipeline {
    std::vector<TransformStep> steps;
    std::size_t degree = 2;

    bool operator==(const TransformPipeline&) const = default;

    /// Canonical text form, e.g. "cumsum,lag1,leadlag@2".
    std::string describe() const;
    static TransformPipeline parse(const std::string& text);

    /// Dimension of the transformed path for a d-dimensional input.
    std::size_t output_dim(std::size_t input_dim) const;
    /// Length of the transformed path for a T-step input (no validation).
    std::size_t output_length(std::size_t input_length) const;
    /// Number of flattened signature coefficients for a d-dimensional input.
    std::size_t feature_size(std::size_t input_dim) const;
};

/// [cumulative_sum_concat, lag_add(1), lead_lag] at the given degree.
TransformPipeline default_pipeline(std::size_t degree = 2);

/// Applies the steps in order. Throws ShapeError / DomainError from the steps.
Path apply_pipeline(const Path& x, const TransformPipeline& pipeline);

/// Adjoint of apply_pipeline: maps a gradient on the transformed path back to
/// the input path. Every step is affine in the input, so this is exact.
Path apply_pipeline_backward(const Path& x, const TransformPipeline& pipeline,
                             const Path& grad_out);

/// Truncated signature of the piecewise-linear interpolation of x, computed as
/// the ordered product of segment exponentials (Chen's identity).
TruncatedTensor path_signature(const Path& x, std::size_t degree);

/// Gradient of a scalar loss w.r.t. the path points, given d loss / d S(x).
Path path_signature_backward(const Path& x, const TruncatedTensor& grad_signature);

/// flatten(path_signature(apply_pipeline(x), degree)).
std::vector<double> signature_features(const Path& x, const TransformPipeline& pipeline);

/// Gradient of a scalar loss w.r.t. x given its gradient w.r.t. signature_features(x).
Path signature_features_backward(const Path& x, const TransformPipeline& pipeline,
                                 std::span<const double> grad_features);

/// Coefficient-wise mean of signature_features over the batch (fixed summation order).
std::vector<double> expected_signature(std::span<const Path> batch,
                                       const TransformPipeline& pipeline);

/// Sum of Euclidean lengths of the segments.
double one_variation(const Path& x);

}  // namespace sigcwgan
