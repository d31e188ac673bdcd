#include "regression_oracle.hpp"
#include "sigcwgan/errors.hpp"
#include "sigcwgan/sigregress.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numeric>

namespace sigcwgan {
namespace {

using testing::random_path;

TEST(SigRegress, NoiselessRecovery) {
    Rng rng(1);
    const Eigen::MatrixXd x = random_path(rng, 40, 1);
    const Eigen::MatrixXd y = 2.0 * x;
    const auto map = fit(x, y, 0.0);
    EXPECT_NEAR(map.weights(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(map.intercept(0), 0.0, 1e-12);
    EXPECT_NEAR((predict_rows(map, x) - y).norm(), 0.0, 1e-12);
    EXPECT_NEAR(predict(map, Eigen::VectorXd::Constant(1, 3.0))(0), 6.0, 1e-12);
    EXPECT_NEAR(r_squared(y, predict_rows(map, x)), 1.0, 1e-12);
}

TEST(SigRegress, ConstantTarget) {
    Rng rng(2);
    const Eigen::MatrixXd x = random_path(rng, 30, 3);
    const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(30, 2, 4.5);
    const auto map = fit(x, y, 0.1);
    EXPECT_LT(map.weights.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(map.intercept(0), 4.5, 1e-12);
    EXPECT_NEAR(map.intercept(1), 4.5, 1e-12);
}

TEST(SigRegress, MatchesEliminationOracle) {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXd x = random_path(rng, 50, 6);
        const Eigen::MatrixXd y = random_path(rng, 50, 3);
        for (double lambda : {0.0, 0.1, 3.0}) {
            const auto map = fit(x, y, lambda);
            const auto [w, b] = testing::oracle_ridge(x, y, lambda);
            EXPECT_LT((map.weights - w).cwiseAbs().maxCoeff(), 1e-8);
            EXPECT_LT((map.intercept - b).cwiseAbs().maxCoeff(), 1e-8);
        }
    }
}

TEST(SigRegress, ZeroMapPredictsIntercept) {
    LinearSigMap map;
    map.weights = Eigen::MatrixXd::Zero(2, 3);
    map.intercept = Eigen::Vector2d(1.0, -1.0);
    EXPECT_EQ(predict(map, Eigen::Vector3d(5, 6, 7)), map.intercept);
    EXPECT_THROW(predict(map, Eigen::Vector2d(1, 2)), ShapeError);
}

TEST(SigRegress, PredictIsAffine) {
    Rng rng(4);
    const auto map = fit(random_path(rng, 20, 3), random_path(rng, 20, 2), 0.5);
    const Eigen::VectorXd a = random_path(rng, 3, 1);
    const Eigen::VectorXd b = random_path(rng, 3, 1);
    const double t = 0.3;
    EXPECT_LT((predict(map, t * a + (1 - t) * b) - (t * predict(map, a) + (1 - t) * predict(map, b)))
                  .norm(),
              1e-12);
}

TEST(SigRegress, RankDeficientNeedsRidge) {
    Rng rng(5);
    Eigen::MatrixXd x = random_path(rng, 20, 3);
    x.col(2) = x.col(0) + x.col(1);
    const Eigen::MatrixXd y = random_path(rng, 20, 1);
    EXPECT_THROW(fit(x, y, 0.0), DomainError);
    EXPECT_NO_THROW(fit(x, y, 1e-3));
    // A constant column (like the level-0 signature term) is absorbed by the intercept.
    Eigen::MatrixXd with_const(20, 2);
    with_const << Eigen::VectorXd::Ones(20), x.col(0);
    EXPECT_THROW(fit(with_const, y, 0.0), DomainError);
}

TEST(SigRegress, ShapeAndDomainErrors) {
    EXPECT_THROW(fit(Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 1), 1.0), ShapeError);
    EXPECT_THROW(fit(Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(4, 1), 1.0), ShapeError);
    EXPECT_THROW(fit(Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(3, 1), -1.0), DomainError);
}

TEST(SigRegress, RidgeShrinksWeights) {
    Rng rng(6);
    const Eigen::MatrixXd x = random_path(rng, 60, 5);
    const Eigen::MatrixXd y = x * random_path(rng, 5, 2) + 0.1 * random_path(rng, 60, 2);
    double previous = fit(x, y, 0.0).weights.norm();
    for (double lambda : {1e-3, 1e-1, 1.0, 10.0, 100.0, 1e4}) {
        const double norm = fit(x, y, lambda).weights.norm();
        EXPECT_LE(norm, previous + 1e-12);
        previous = norm;
    }
}

TEST(SigRegress, RowPermutationInvariant) {
    Rng rng(7);
    const Eigen::MatrixXd x = random_path(rng, 40, 4);
    const Eigen::MatrixXd y = random_path(rng, 40, 3);
    std::vector<int> order(40);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.below(i + 1)]);
    }
    Eigen::MatrixXd xp(40, 4), yp(40, 3);
    for (int i = 0; i < 40; ++i) {
        xp.row(i) = x.row(order[static_cast<std::size_t>(i)]);
        yp.row(i) = y.row(order[static_cast<std::size_t>(i)]);
    }
    const auto a = fit(x, y, 0.01);
    const auto b = fit(xp, yp, 0.01);
    EXPECT_LT((a.weights - b.weights).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((a.intercept - b.intercept).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SigRegress, DefaultRidgeScale) {
    Rng rng(8);
    const Eigen::MatrixXd x = random_path(rng, 100, 4);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const double trace = (x.rowwise() - mean).squaredNorm();
    EXPECT_NEAR(default_ridge(x), 1e-6 * trace / 4.0, 1e-18);
    EXPECT_GT(default_ridge(Eigen::MatrixXd::Ones(5, 2)), 0.0);
}

TEST(SigRegress, RSquaredRejectsConstantTruth) {
    EXPECT_THROW(r_squared(Eigen::MatrixXd::Ones(5, 1), Eigen::MatrixXd::Zero(5, 1)), DomainError);
}

}  // namespace
}  // namespace sigcwgan
