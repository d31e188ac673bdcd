#include "sigcwgan/sigregress.hpp"

#include "sigcwgan/errors.hpp"

#include <string>

namespace sigcwgan {

namespace {

constexpr double kRankTolerance = 1e-12;

}  // namespace

double default_ridge(const Eigen::MatrixXd& features) {
    if (features.rows() == 0 || features.cols() == 0) {
        throw ShapeError("default_ridge: empty design matrix");
    }
    const Eigen::RowVectorXd mean = features.colwise().mean();
    const double trace = (features.rowwise() - mean).squaredNorm();
    const double lambda = 1e-6 * trace / static_cast<double>(features.cols());
    return lambda > 0.0 ? lambda : 1e-12;
}

LinearSigMap fit(const Eigen::MatrixXd& past_features, const Eigen::MatrixXd& future_features,
                 double lambda) {
    const Eigen::Index n = past_features.rows();
    if (n < 1) {
        throw ShapeError("fit: no samples");
    }
    if (future_features.rows() != n) {
        throw ShapeError("fit: " + std::to_string(n) + " input rows but " +
                         std::to_string(future_features.rows()) + " target rows");
    }
    if (!(lambda >= 0.0)) {
        throw DomainError("fit: lambda must be non-negative");
    }
    if (!past_features.allFinite() || !future_features.allFinite()) {
        throw DomainError("fit: non-finite features");
    }

    const Eigen::RowVectorXd x_mean = past_features.colwise().mean();
    const Eigen::RowVectorXd y_mean = future_features.colwise().mean();
    const Eigen::MatrixXd xc = past_features.rowwise() - x_mean;
    const Eigen::MatrixXd yc = future_features.rowwise() - y_mean;

    const Eigen::Index p = past_features.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += lambda;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    bool degenerate = llt.info() != Eigen::Success;
    if (!degenerate && lambda == 0.0 && p > 0) {
        const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal().array().square();
        degenerate = pivots.minCoeff() <= kRankTolerance * pivots.maxCoeff() ||
                     pivots.maxCoeff() == 0.0;
    }
    if (degenerate) {
        throw DomainError(
            "fit: design matrix is rank-deficient; use a positive ridge lambda");
    }

    LinearSigMap map;
    map.lambda = lambda;
    map.weights = llt.solve(xc.transpose() * yc).transpose();
    map.intercept = (y_mean - x_mean * map.weights.transpose()).transpose();
    return map;
}

Eigen::VectorXd predict(const LinearSigMap& map, const Eigen::VectorXd& past_feature) {
    if (past_feature.size() != map.input_dim()) {
        throw ShapeError("predict: feature length " + std::to_string(past_feature.size()) +
                         " != map input dim " + std::to_string(map.input_dim()));
    }
    return map.weights * past_feature + map.intercept;
}

Eigen::MatrixXd predict_rows(const LinearSigMap& map, const Eigen::MatrixXd& past_features) {
    if (past_features.cols() != map.input_dim()) {
        throw ShapeError("predict_rows: feature width mismatch");
    }
    Eigen::MatrixXd out = past_features * map.weights.transpose();
    out.rowwise() += map.intercept.transpose();
    return out;
}

double r_squared(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& prediction) {
    if (truth.rows() != prediction.rows() || truth.cols() != prediction.cols() ||
        truth.rows() < 2) {
        throw ShapeError("r_squared: shape mismatch or fewer than two samples");
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
        const double mean = truth.col(j).mean();
        const double ss_tot = (truth.col(j).array() - mean).square().sum();
        const double ss_res = (truth.col(j) - prediction.col(j)).squaredNorm();
        if (ss_tot == 0.0) {
            throw DomainError("r_squared: constant target column");
        }
        total += 1.0 - ss_res / ss_tot;
    }
    return total / static_cast<double>(truth.cols());
}

}  // namespace sigcwgan
