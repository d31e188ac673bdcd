#pragma once

#include "sigcwgan/random.hpp"
#include "sigcwgan/timeseries.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sigcwgan {

struct ArfnnShape {
    std::size_t dim = 1;      // d
    std::size_t lags = 3;     // p
    std::size_t hidden = 50;  // H

    std::size_t input_dim() const { return dim * (lags + 1); }
    bool operator==(const ArfnnShape&) const = default;
};

/// Weights of the autoregressive generator
///   G(x, z) = A4 . R3 . R2 . prelu_1 . A1 (x z),   R(h) = h + prelu(F(h)).
///
/// All parameters live in one flat vector (the Adam and finite-difference
/// code work on it directly); the accessors are views into it. Layout:
/// W1, b1, alpha1, W2, b2, alpha2, W3, b3, alpha3, W4, b4 with matrices in
/// column-major order.
class ArfnnParams {
public:
    using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
    using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
    using VectorMap = Eigen::Map<Eigen::VectorXd>;
    using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

    /// All-zero parameters.
    explicit ArfnnParams(ArfnnShape shape);

    /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)],
    /// PReLU slopes 0.25.
    static ArfnnParams initialize(ArfnnShape shape, Rng& rng);

    const ArfnnShape& shape() const { return shape_; }
    Eigen::VectorXd& flat() { return flat_; }
    const Eigen::VectorXd& flat() const { return flat_; }

    /// layer in {1,2,3,4}; 1 is the input affine map, 4 the output map.
    MatrixMap weight(int layer);
    ConstMatrixMap weight(int layer) const;
    VectorMap bias(int layer);
    ConstVectorMap bias(int layer) const;
    /// PReLU slope after layer 1 and inside residual blocks 2 and 3.
    double& slope(int layer);
    double slope(int layer) const;

    bool operator==(const ArfnnParams& other) const {
        return shape_ == other.shape_ && flat_ == other.flat_;
    }

private:
    struct Block {
        Eigen::Index offset;
        Eigen::Index rows;
        Eigen::Index cols;
    };
    Block weight_block(int layer) const;
    Block bias_block(int layer) const;
    Eigen::Index slope_index(int layer) const;

    ArfnnShape shape_;
    std::vector<Block> weights_;
    std::vector<Block> biases_;
    std::vector<Eigen::Index> slopes_;
    Eigen::VectorXd flat_;
};

/// Activations kept for the backward pass of one batched forward call.
/// Columns are samples.
struct ForwardTape {
    Eigen::MatrixXd input;
    Eigen::MatrixXd pre1, act1;
    Eigen::MatrixXd pre2, hidden2;
    Eigen::MatrixXd pre3, hidden3;
};

/// Batched forward pass: inputs is input_dim x B (past lags oldest first,
/// then noise). Records activations when tape is non-null.
Eigen::MatrixXd forward_batch(const ArfnnParams& params, const Eigen::MatrixXd& inputs,
                              ForwardTape* tape = nullptr);

/// Single-sample forward: x_past has d*p entries (rows oldest first), z has d.
Eigen::VectorXd forward(const ArfnnParams& params, const Eigen::VectorXd& x_past,
                        const Eigen::VectorXd& z);

/// Parameter gradients for one forward call given d loss / d output (d x B).
/// When grad_input is non-null it receives d loss / d input.
ArfnnParams backward(const ArfnnParams& params, const ForwardTape& tape,
                     const Eigen::MatrixXd& output_grad, Eigen::MatrixXd* grad_input = nullptr);

/// Record of a batched rollout.
struct RolloutTape {
    ArfnnShape shape;
    Eigen::Index batch = 0;
    std::vector<ForwardTape> steps;
    /// Noise row consumed by each forward call, in call order.
    std::vector<std::size_t> noise_rows_read;
};

/// Batched q-step rollout. `past` is (d*p) x B with lags oldest first; noise[i]
/// is the d x B noise for step i. Step i feeds the last p rows of
/// (past, out_0, ..., out_{i-1}). Returns q matrices of shape d x B.
std::vector<Eigen::MatrixXd> rollout_batch(const ArfnnParams& params, const Eigen::MatrixXd& past,
                                           std::span<const Eigen::MatrixXd> noise,
                                           RolloutTape* tape = nullptr);

/// Single rollout: x_past is p x d, noise is q x d; returns q x d.
Path rollout(const ArfnnParams& params, const Path& x_past, std::size_t q, const Path& noise);

/// Parameter gradients through a recorded rollout, including the recursion
/// through generated steps. output_grads[i] is d loss / d out_i (d x B).
ArfnnParams rollout_backward(const ArfnnParams& params, const RolloutTape& tape,
                             std::span<const Eigen::MatrixXd> output_grads);

/// Packs p x d windows into the (d*p) x B layout used by rollout_batch.
Eigen::MatrixXd pack_pasts(std::span<const Path> pasts);

struct AdamState {
    Eigen::VectorXd first_moment;
    Eigen::VectorXd second_moment;
    std::uint64_t step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_params(const ArfnnParams& params, double learning_rate = 1e-3);
};

/// One bias-corrected Adam update. Non-finite gradients leave params and
/// state untouched and raise DivergenceError. PReLU slopes are projected back
/// onto [0, inf) after the update.
void adam_step(ArfnnParams& params, const ArfnnParams& grads, AdamState& state);

}  // namespace sigcwgan
