#pragma once

#include <Eigen/Dense>

namespace sigcwgan {

/// Affine map from past-window signature features to the predicted expected
/// signature of the future window: predict(x) = weights * x + intercept.
struct LinearSigMap {
    Eigen::MatrixXd weights;    // output_dim x input_dim
    Eigen::VectorXd intercept;  // output_dim
    double lambda = 0.0;

    Eigen::Index input_dim() const { return weights.cols(); }
    Eigen::Index output_dim() const { return weights.rows(); }

    bool operator==(const LinearSigMap& other) const {
        return lambda == other.lambda && weights.rows() == other.weights.rows() &&
               weights.cols() == other.weights.cols() && weights == other.weights &&
               intercept == other.intercept;
    }
};

/// Ridge penalty used when none is configured: 1e-6 * trace(Xc' Xc) / P, with
/// Xc the column-centred features.
double default_ridge(const Eigen::MatrixXd& features);

/// Ridge least squares with an unpenalised intercept: minimises
/// |Y - X W' - 1 b'|^2 + lambda |W|^2 via a Cholesky solve of the centred
/// normal equations. Rows are samples.
///
/// With lambda == 0 a rank-deficient design raises DomainError asking for a
/// positive lambda.
LinearSigMap fit(const Eigen::MatrixXd& past_features, const Eigen::MatrixXd& future_features,
                 double lambda);

/// weights * x + intercept; throws ShapeError on a length mismatch.
Eigen::VectorXd predict(const LinearSigMap& map, const Eigen::VectorXd& past_feature);

/// Row-wise predict for a sample matrix (N x input_dim -> N x output_dim).
Eigen::MatrixXd predict_rows(const LinearSigMap& map, const Eigen::MatrixXd& past_features);

/// Coefficient of determination 1 - SS_res/SS_tot, averaged over columns.
double r_squared(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& prediction);

}  // namespace sigcwgan
