#include "gradient_check.hpp"
#include "sigcwgan/arfnn.hpp"
#include "sigcwgan/errors.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace sigcwgan {
namespace {

using testing::random_path;

TEST(Arfnn, ParameterCountAndLayout) {
    const ArfnnShape s{2, 3, 5};
    const ArfnnParams params(s);
    const Eigen::Index in = 8;
    EXPECT_EQ(params.flat().size(), 5 * in + 5 + 1 + 2 * (25 + 5 + 1) + 2 * 5 + 2);
    EXPECT_EQ(params.weight(1).rows(), 5);
    EXPECT_EQ(params.weight(1).cols(), in);
    EXPECT_EQ(params.weight(4).rows(), 2);
    EXPECT_EQ(params.bias(4).size(), 2);
    EXPECT_THROW(params.slope(4), DomainError);
    EXPECT_THROW(params.weight(0), DomainError);
    EXPECT_THROW(ArfnnParams(ArfnnShape{0, 1, 1}), DomainError);
}

TEST(Arfnn, InitializationRanges) {
    Rng rng(1);
    const auto params = ArfnnParams::initialize({2, 3, 50}, rng);
    for (int layer = 1; layer <= 4; ++layer) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(params.weight(layer).cols()));
        EXPECT_LE(params.weight(layer).cwiseAbs().maxCoeff(), bound);
        EXPECT_LE(params.bias(layer).cwiseAbs().maxCoeff(), bound);
        EXPECT_GT(params.weight(layer).cwiseAbs().maxCoeff(), 0.5 * bound);
    }
    for (int layer = 1; layer <= 3; ++layer) EXPECT_EQ(params.slope(layer), 0.25);
}

TEST(Arfnn, ZeroWeightsGiveZeroOutput) {
    Rng rng(2);
    const ArfnnParams params({2, 3, 7});
    const Eigen::VectorXd out = forward(params, random_path(rng, 6, 1), random_path(rng, 2, 1));
    EXPECT_EQ(out, Eigen::VectorXd::Zero(2));
}

TEST(Arfnn, UnitSlopesGiveComposedAffineMap) {
    Rng rng(3);
    const ArfnnShape shape{2, 2, 6};
    auto params = ArfnnParams::initialize(shape, rng);
    for (int layer = 1; layer <= 3; ++layer) params.slope(layer) = 1.0;
    // With identity activations: h1 = W1 u + b1, R(h) = (I + W) h + b.
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(6, 6);
    const Eigen::MatrixXd r2 = eye + params.weight(2);
    const Eigen::MatrixXd r3 = eye + params.weight(3);
    const Eigen::MatrixXd a = params.weight(4) * r3 * r2 * params.weight(1);
    const Eigen::VectorXd c =
        params.weight(4) * (r3 * (r2 * params.bias(1) + params.bias(2)) + params.bias(3)) +
        params.bias(4);
    for (int rep = 0; rep < 5; ++rep) {
        const Eigen::VectorXd x = random_path(rng, 4, 1);
        const Eigen::VectorXd z = random_path(rng, 2, 1);
        Eigen::VectorXd u(6);
        u << x, z;
        EXPECT_LT((forward(params, x, z) - (a * u + c)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Arfnn, PreluLimits) {
    // alpha = 0 is ReLU: a single negative pre-activation is zeroed.
    ArfnnParams params({1, 1, 1});
    params.weight(1)(0, 0) = 1.0;  // h = x
    params.weight(4)(0, 0) = 1.0;
    params.slope(1) = 0.0;
    EXPECT_EQ(forward(params, Eigen::VectorXd::Constant(1, -2.0), Eigen::VectorXd::Zero(1))(0), 0.0);
    EXPECT_EQ(forward(params, Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Zero(1))(0), 2.0);
    params.slope(1) = 1.0;
    EXPECT_EQ(forward(params, Eigen::VectorXd::Constant(1, -2.0), Eigen::VectorXd::Zero(1))(0), -2.0);
}

TEST(Arfnn, ZeroResidualBlockIsIdentity) {
    Rng rng(4);
    auto params = ArfnnParams::initialize({1, 2, 4}, rng);
    auto reference = params;
    reference.weight(2).setZero();
    reference.bias(2).setZero();
    reference.weight(3).setZero();
    reference.bias(3).setZero();
    // Output is then A4(prelu(A1 u)) computed directly.
    const Eigen::VectorXd x = random_path(rng, 2, 1);
    const Eigen::VectorXd z = random_path(rng, 1, 1);
    Eigen::VectorXd u(3);
    u << x, z;
    Eigen::VectorXd h = params.weight(1) * u + params.bias(1);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        if (h(i) < 0) h(i) *= params.slope(1);
    }
    const Eigen::VectorXd expected = params.weight(4) * h + params.bias(4);
    EXPECT_LT((forward(reference, x, z) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Arfnn, ForwardErrors) {
    const ArfnnParams params({2, 3, 4});
    EXPECT_THROW(forward(params, Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(2)), ShapeError);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
    x(0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(forward(params, x, Eigen::VectorXd::Zero(2)), DomainError);
}

TEST(Arfnn, ForwardDeterministic) {
    Rng rng(5);
    const auto params = ArfnnParams::initialize({3, 2, 8}, rng);
    const Eigen::MatrixXd in = random_path(rng, 9, 16);
    const Eigen::MatrixXd a = forward_batch(params, in);
    const Eigen::MatrixXd b = forward_batch(params, in);
    EXPECT_EQ(a, b);
    // Batched and single-sample evaluation agree.
    for (Eigen::Index c = 0; c < 16; ++c) {
        const Eigen::VectorXd col = in.col(c);
        EXPECT_LT((forward(params, col.head(6), col.tail(3)) - a.col(c)).cwiseAbs().maxCoeff(),
                  1e-14);
    }
}

TEST(Rollout, SingleStepEqualsForward) {
    Rng rng(6);
    const auto params = ArfnnParams::initialize({2, 3, 5}, rng);
    const Path past = random_path(rng, 3, 2);
    const Path noise = random_path(rng, 1, 2);
    const Path out = rollout(params, past, 1, noise);
    Eigen::VectorXd x(6);
    for (Eigen::Index t = 0; t < 3; ++t) x.segment(2 * t, 2) = past.row(t).transpose();
    EXPECT_LT((out.row(0).transpose() - forward(params, x, noise.row(0).transpose())).norm(), 1e-14);
}

TEST(Rollout, SecondStepConditionsOnFirstOutput) {
    Rng rng(7);
    const auto params = ArfnnParams::initialize({1, 2, 5}, rng);
    const Path past = random_path(rng, 2, 1);
    const Path noise = random_path(rng, 2, 1);
    const Path out = rollout(params, past, 2, noise);
    Eigen::VectorXd x(2);
    x << past(1, 0), out(0, 0);
    EXPECT_NEAR(out(1, 0), forward(params, x, noise.row(1).transpose())(0), 1e-14);
}

TEST(Rollout, SelectorRepeatsLastPastValue) {
    // h1 = (x_last, -x_last), residual blocks off, output h1_0 - h1_1 = 2 x_last
    // at alpha = 1; halve it in W4 to get G(x, z) = x_last.
    const ArfnnShape shape{1, 3, 2};
    ArfnnParams params(shape);
    params.weight(1)(0, 2) = 1.0;
    params.weight(1)(1, 2) = -1.0;
    params.weight(4)(0, 0) = 0.5;
    params.weight(4)(0, 1) = -0.5;
    for (int layer = 1; layer <= 3; ++layer) params.slope(layer) = 1.0;
    Path past(3, 1);
    past << 0.3, -1.2, 2.5;
    Rng rng(8);
    const Path out = rollout(params, past, 5, random_path(rng, 5, 1));
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(out(i, 0), 2.5);
}

TEST(Rollout, ReadsNoiseInStepOrder) {
    Rng rng(9);
    const auto params = ArfnnParams::initialize({2, 2, 4}, rng);
    const Eigen::MatrixXd past = random_path(rng, 4, 3);
    std::vector<Eigen::MatrixXd> noise;
    for (int i = 0; i < 4; ++i) noise.push_back(random_path(rng, 2, 3));
    RolloutTape tape;
    const auto outs = rollout_batch(params, past, noise, &tape);
    EXPECT_EQ(tape.steps.size(), 4u);
    EXPECT_EQ(tape.noise_rows_read, (std::vector<std::size_t>{0, 1, 2, 3}));
    // Changing noise for step k leaves every earlier output untouched.
    for (std::size_t k = 0; k < 4; ++k) {
        auto changed = noise;
        changed[k].setConstant(7.0);
        const auto outs2 = rollout_batch(params, past, changed);
        for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(outs[i], outs2[i]);
        EXPECT_NE(outs[k], outs2[k]);
    }
}

TEST(Rollout, Errors) {
    const ArfnnParams params({2, 3, 4});
    EXPECT_THROW(rollout(params, Path::Zero(3, 2), 0, Path::Zero(0, 2)), DomainError);
    EXPECT_THROW(rollout(params, Path::Zero(2, 2), 1, Path::Zero(1, 2)), ShapeError);
    EXPECT_THROW(rollout(params, Path::Zero(3, 2), 2, Path::Zero(1, 2)), ShapeError);
}

TEST(Backward, ZeroOutputGradient) {
    Rng rng(10);
    const auto params = ArfnnParams::initialize({2, 2, 5}, rng);
    ForwardTape tape;
    forward_batch(params, random_path(rng, 6, 4), &tape);
    const auto grads = backward(params, tape, Eigen::MatrixXd::Zero(2, 4));
    EXPECT_EQ(grads.flat(), Eigen::VectorXd::Zero(params.flat().size()));
}

TEST(Backward, AffineNetworkClosedForm) {
    // With alpha = 1 and loss <g, out>: dL/dW4 = g h3', dL/db4 = g,
    // dL/dW1 = (M' g) u' with M = W4 (I + W3)(I + W2).
    Rng rng(11);
    const ArfnnShape shape{2, 1, 4};
    auto params = ArfnnParams::initialize(shape, rng);
    for (int layer = 1; layer <= 3; ++layer) params.slope(layer) = 1.0;
    const Eigen::MatrixXd u = random_path(rng, 4, 1);
    const Eigen::MatrixXd g = random_path(rng, 2, 1);
    ForwardTape tape;
    forward_batch(params, u, &tape);
    const auto grads = backward(params, tape, g);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd h1 = params.weight(1) * u + params.bias(1);
    const Eigen::MatrixXd h2 = h1 + params.weight(2) * h1 + params.bias(2);
    const Eigen::MatrixXd h3 = h2 + params.weight(3) * h2 + params.bias(3);
    const Eigen::MatrixXd m = params.weight(4) * (eye + params.weight(3)) * (eye + params.weight(2));
    EXPECT_LT((grads.weight(4) - g * h3.transpose()).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((grads.bias(4) - g).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((grads.weight(1) - m.transpose() * g * u.transpose()).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((grads.bias(1) - m.transpose() * g).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Backward, RolloutFiniteDifferences) {
    Rng rng(12);
    for (std::size_t q : {1, 2, 3}) {
        for (std::size_t p : {1, 2, 3}) {
            const auto pr = testing::random_rollout_problem(rng, {2, p, 4}, q, 3);
            const auto check = testing::check_rollout_gradients(pr);
            EXPECT_LT(check.max_relative_error, 1e-5) << "p=" << p << " q=" << q;
            EXPECT_GT(check.max_abs_gradient, 0.0);
        }
    }
}

TEST(Adam, ZeroGradientLeavesParams) {
    Rng rng(13);
    auto params = ArfnnParams::initialize({1, 2, 3}, rng);
    const auto before = params;
    auto state = AdamState::for_params(params);
    adam_step(params, ArfnnParams(params.shape()), state);
    EXPECT_EQ(params, before);
    EXPECT_EQ(state.step, 1u);
}

TEST(Adam, FirstStepIsSignTimesLr) {
    Rng rng(14);
    auto params = ArfnnParams::initialize({1, 2, 3}, rng);
    for (int layer = 1; layer <= 3; ++layer) params.slope(layer) = 0.5;
    const auto before = params;
    ArfnnParams grads(params.shape());
    for (Eigen::Index k = 0; k < grads.flat().size(); ++k) grads.flat()(k) = rng.normal();
    auto state = AdamState::for_params(params);
    adam_step(params, grads, state);
    for (Eigen::Index k = 0; k < grads.flat().size(); ++k) {
        const double g = grads.flat()(k);
        const double expected = -1e-3 * g / (std::abs(g) + 1e-8);
        EXPECT_NEAR(params.flat()(k) - before.flat()(k), expected, 1e-15);
    }
}

TEST(Adam, TwoStepReferenceTrace) {
    ArfnnParams params({1, 1, 1});
    params.flat().setConstant(0.5);
    const Eigen::Index n = params.flat().size();
    ArfnnParams g1(params.shape()), g2(params.shape());
    for (Eigen::Index k = 0; k < n; ++k) {
        g1.flat()(k) = 0.1 * static_cast<double>(k + 1);
        g2.flat()(k) = -0.05 * static_cast<double>(k) + 0.2;
    }
    auto state = AdamState::for_params(params, 0.01);
    adam_step(params, g1, state);
    adam_step(params, g2, state);
    for (Eigen::Index k = 0; k < n; ++k) {
        // Published update, written out step by step.
        double theta = 0.5, m = 0.0, v = 0.0;
        const double grads[2] = {g1.flat()(k), g2.flat()(k)};
        for (int t = 1; t <= 2; ++t) {
            m = 0.9 * m + 0.1 * grads[t - 1];
            v = 0.999 * v + 0.001 * grads[t - 1] * grads[t - 1];
            const double mhat = m / (1.0 - std::pow(0.9, t));
            const double vhat = v / (1.0 - std::pow(0.999, t));
            theta -= 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
        }
        EXPECT_NEAR(params.flat()(k), theta, 1e-15);
    }
}

TEST(Adam, RejectsNonFiniteAndKeepsState) {
    Rng rng(15);
    auto params = ArfnnParams::initialize({1, 1, 2}, rng);
    const auto before = params;
    auto state = AdamState::for_params(params);
    ArfnnParams grads(params.shape());
    grads.flat()(0) = std::nan("");
    EXPECT_THROW(adam_step(params, grads, state), DivergenceError);
    EXPECT_EQ(params, before);
    EXPECT_EQ(state.step, 0u);
}

TEST(Adam, SlopesStayNonNegative) {
    ArfnnParams params({1, 1, 2});
    auto state = AdamState::for_params(params, 0.5);
    ArfnnParams grads(params.shape());
    grads.flat().setConstant(1.0);
    adam_step(params, grads, state);
    for (int layer = 1; layer <= 3; ++layer) EXPECT_GE(params.slope(layer), 0.0);
    EXPECT_LT(params.weight(1)(0, 0), 0.0);
}

TEST(PackPasts, Layout) {
    Path a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 5, 6, 7, 8;
    const std::vector<Path> pasts{a, b};
    Eigen::MatrixXd expected(4, 2);
    expected << 1, 5, 2, 6, 3, 7, 4, 8;
    EXPECT_EQ(pack_pasts(pasts), expected);
}

}  // namespace
}  // namespace sigcwgan
