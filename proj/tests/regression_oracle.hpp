#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sigcwgan::testing {

/// Ridge fit with an unpenalised intercept, solved from the uncentred
/// augmented normal equations
///   [X'X + lambda I   X'1] [W']   [X'Y]
///   [1'X              N  ] [b'] = [1'Y]
/// by Gaussian elimination with partial pivoting on plain arrays.
/// Returns (weights Q x P, intercept Q).
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> oracle_ridge(const Eigen::MatrixXd& x,
                                                                const Eigen::MatrixXd& y,
                                                                double lambda) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const std::size_t p = static_cast<std::size_t>(x.cols());
    const std::size_t q = static_cast<std::size_t>(y.cols());
    const std::size_t k = p + 1;
    std::vector<std::vector<double>> a(k, std::vector<double>(k + q, 0.0));
    auto feature = [&](std::size_t row, std::size_t col) {
        return col < p ? x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) : 1.0;
    };
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            const double fi = feature(r, i);
            for (std::size_t j = 0; j < k; ++j) a[i][j] += fi * feature(r, j);
            for (std::size_t c = 0; c < q; ++c) {
                a[i][k + c] += fi * y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
        }
    }
    for (std::size_t i = 0; i < p; ++i) a[i][i] += lambda;

    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (a[pivot][col] == 0.0) throw std::runtime_error("oracle_ridge: singular system");
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < k + q; ++c) a[r][c] -= f * a[col][c];
        }
    }
    Eigen::MatrixXd w(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p));
    Eigen::VectorXd b(static_cast<Eigen::Index>(q));
    for (std::size_t c = 0; c < q; ++c) {
        for (std::size_t i = 0; i < p; ++i) {
            w(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = a[i][k + c] / a[i][i];
        }
        b(static_cast<Eigen::Index>(c)) = a[p][k + c] / a[p][p];
    }
    return {w, b};
}

}  // namespace sigcwgan::testing
