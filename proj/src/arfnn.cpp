#include "sigcwgan/arfnn.hpp"

#include "sigcwgan/errors.hpp"

#include <cmath>
#include <string>

namespace sigcwgan {

namespace {

constexpr double kInitialSlope = 0.25;

Eigen::MatrixXd prelu(const Eigen::MatrixXd& x, double slope) {
    return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

// d prelu / d x evaluated at x, times g.
Eigen::MatrixXd prelu_backward(const Eigen::MatrixXd& x, double slope, const Eigen::MatrixXd& g) {
    return x.binaryExpr(g, [slope](double v, double gv) { return v > 0.0 ? gv : slope * gv; });
}

// d prelu / d slope = min(0, x), contracted with g.
double prelu_slope_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& g) {
    return x.binaryExpr(g, [](double v, double gv) { return v > 0.0 ? 0.0 : v * gv; }).sum();
}

void check_layer(int layer, int lo, int hi) {
    if (layer < lo || layer > hi) {
        throw DomainError("ArfnnParams: no layer " + std::to_string(layer));
    }
}

}  // namespace

ArfnnParams::ArfnnParams(ArfnnShape shape) : shape_(shape) {
    if (shape.dim < 1 || shape.lags < 1 || shape.hidden < 1) {
        throw DomainError("ArfnnParams: dim, lags and hidden width must be positive");
    }
    const auto d = static_cast<Eigen::Index>(shape.dim);
    const auto h = static_cast<Eigen::Index>(shape.hidden);
    const auto in = static_cast<Eigen::Index>(shape.input_dim());
    Eigen::Index offset = 0;
    auto add_layer = [&](Eigen::Index rows, Eigen::Index cols, bool with_slope) {
        weights_.push_back({offset, rows, cols});
        offset += rows * cols;
        biases_.push_back({offset, rows, 1});
        offset += rows;
        if (with_slope) {
            slopes_.push_back(offset);
            offset += 1;
        }
    };
    add_layer(h, in, true);
    add_layer(h, h, true);
    add_layer(h, h, true);
    add_layer(d, h, false);
    flat_ = Eigen::VectorXd::Zero(offset);
}

ArfnnParams ArfnnParams::initialize(ArfnnShape shape, Rng& rng) {
    ArfnnParams params(shape);
    for (int layer = 1; layer <= 4; ++layer) {
        auto w = params.weight(layer);
        auto b = params.bias(layer);
        const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                w(i, j) = bound * (2.0 * rng.uniform() - 1.0);
            }
        }
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            b(i) = bound * (2.0 * rng.uniform() - 1.0);
        }
        if (layer <= 3) {
            params.slope(layer) = kInitialSlope;
        }
    }
    return params;
}

ArfnnParams::Block ArfnnParams::weight_block(int layer) const {
    check_layer(layer, 1, 4);
    return weights_[static_cast<std::size_t>(layer - 1)];
}

ArfnnParams::Block ArfnnParams::bias_block(int layer) const {
    check_layer(layer, 1, 4);
    return biases_[static_cast<std::size_t>(layer - 1)];
}

Eigen::Index ArfnnParams::slope_index(int layer) const {
    check_layer(layer, 1, 3);
    return slopes_[static_cast<std::size_t>(layer - 1)];
}

ArfnnParams::MatrixMap ArfnnParams::weight(int layer) {
    const Block b = weight_block(layer);
    return MatrixMap(flat_.data() + b.offset, b.rows, b.cols);
}

ArfnnParams::ConstMatrixMap ArfnnParams::weight(int layer) const {
    const Block b = weight_block(layer);
    return ConstMatrixMap(flat_.data() + b.offset, b.rows, b.cols);
}

ArfnnParams::VectorMap ArfnnParams::bias(int layer) {
    const Block b = bias_block(layer);
    return VectorMap(flat_.data() + b.offset, b.rows);
}

ArfnnParams::ConstVectorMap ArfnnParams::bias(int layer) const {
    const Block b = bias_block(layer);
    return ConstVectorMap(flat_.data() + b.offset, b.rows);
}

double& ArfnnParams::slope(int layer) { return flat_[slope_index(layer)]; }

double ArfnnParams::slope(int layer) const { return flat_[slope_index(layer)]; }

Eigen::MatrixXd forward_batch(const ArfnnParams& params, const Eigen::MatrixXd& inputs,
                              ForwardTape* tape) {
    const auto in = static_cast<Eigen::Index>(params.shape().input_dim());
    if (inputs.rows() != in) {
        throw ShapeError("forward: expected " + std::to_string(in) + " input rows, got " +
                         std::to_string(inputs.rows()));
    }
    if (!inputs.allFinite()) {
        throw DomainError("forward: non-finite input");
    }
    Eigen::MatrixXd pre1 = params.weight(1) * inputs;
    pre1.colwise() += params.bias(1);
    Eigen::MatrixXd act1 = prelu(pre1, params.slope(1));

    Eigen::MatrixXd pre2 = params.weight(2) * act1;
    pre2.colwise() += params.bias(2);
    Eigen::MatrixXd hidden2 = act1 + prelu(pre2, params.slope(2));

    Eigen::MatrixXd pre3 = params.weight(3) * hidden2;
    pre3.colwise() += params.bias(3);
    Eigen::MatrixXd hidden3 = hidden2 + prelu(pre3, params.slope(3));

    Eigen::MatrixXd out = params.weight(4) * hidden3;
    out.colwise() += params.bias(4);

    if (tape != nullptr) {
        tape->input = inputs;
        tape->pre1 = std::move(pre1);
        tape->act1 = std::move(act1);
        tape->pre2 = std::move(pre2);
        tape->hidden2 = std::move(hidden2);
        tape->pre3 = std::move(pre3);
        tape->hidden3 = std::move(hidden3);
    }
    return out;
}

Eigen::VectorXd forward(const ArfnnParams& params, const Eigen::VectorXd& x_past,
                        const Eigen::VectorXd& z) {
    const auto& shape = params.shape();
    if (static_cast<std::size_t>(x_past.size()) != shape.dim * shape.lags ||
        static_cast<std::size_t>(z.size()) != shape.dim) {
        throw ShapeError("forward: x_past needs d*p entries and z needs d entries");
    }
    Eigen::VectorXd input(x_past.size() + z.size());
    input << x_past, z;
    return forward_batch(params, input);
}

ArfnnParams backward(const ArfnnParams& params, const ForwardTape& tape,
                     const Eigen::MatrixXd& output_grad, Eigen::MatrixXd* grad_input) {
    const auto d = static_cast<Eigen::Index>(params.shape().dim);
    if (output_grad.rows() != d || output_grad.cols() != tape.input.cols() ||
        tape.input.rows() != static_cast<Eigen::Index>(params.shape().input_dim())) {
        throw ShapeError("backward: tape, gradient and params disagree in shape");
    }
    ArfnnParams grads(params.shape());

    grads.weight(4) = output_grad * tape.hidden3.transpose();
    grads.bias(4) = output_grad.rowwise().sum();
    Eigen::MatrixXd g_hidden3 = params.weight(4).transpose() * output_grad;

    // Residual block 3: hidden3 = hidden2 + prelu(W3 hidden2 + b3).
    grads.slope(3) = prelu_slope_grad(tape.pre3, g_hidden3);
    Eigen::MatrixXd g_pre3 = prelu_backward(tape.pre3, params.slope(3), g_hidden3);
    grads.weight(3) = g_pre3 * tape.hidden2.transpose();
    grads.bias(3) = g_pre3.rowwise().sum();
    Eigen::MatrixXd g_hidden2 = g_hidden3 + params.weight(3).transpose() * g_pre3;

    grads.slope(2) = prelu_slope_grad(tape.pre2, g_hidden2);
    Eigen::MatrixXd g_pre2 = prelu_backward(tape.pre2, params.slope(2), g_hidden2);
    grads.weight(2) = g_pre2 * tape.act1.transpose();
    grads.bias(2) = g_pre2.rowwise().sum();
    Eigen::MatrixXd g_act1 = g_hidden2 + params.weight(2).transpose() * g_pre2;

    grads.slope(1) = prelu_slope_grad(tape.pre1, g_act1);
    Eigen::MatrixXd g_pre1 = prelu_backward(tape.pre1, params.slope(1), g_act1);
    grads.weight(1) = g_pre1 * tape.input.transpose();
    grads.bias(1) = g_pre1.rowwise().sum();

    if (grad_input != nullptr) {
        *grad_input = params.weight(1).transpose() * g_pre1;
    }
    return grads;
}

std::vector<Eigen::MatrixXd> rollout_batch(const ArfnnParams& params, const Eigen::MatrixXd& past,
                                           std::span<const Eigen::MatrixXd> noise,
                                           RolloutTape* tape) {
    const auto& shape = params.shape();
    const auto d = static_cast<Eigen::Index>(shape.dim);
    const auto p = static_cast<Eigen::Index>(shape.lags);
    const Eigen::Index batch = past.cols();
    if (noise.empty()) {
        throw DomainError("rollout: q must be at least 1");
    }
    if (past.rows() != d * p) {
        throw ShapeError("rollout: past must have d*p rows");
    }
    for (const auto& z : noise) {
        if (z.rows() != d || z.cols() != batch) {
            throw ShapeError("rollout: each noise block must be d x batch");
        }
    }
    if (tape != nullptr) {
        tape->shape = shape;
        tape->batch = batch;
        tape->steps.assign(noise.size(), ForwardTape{});
        tape->noise_rows_read.clear();
    }

    std::vector<Eigen::MatrixXd> outputs;
    outputs.reserve(noise.size());
    Eigen::MatrixXd state = past;
    Eigen::MatrixXd input(d * (p + 1), batch);
    for (std::size_t i = 0; i < noise.size(); ++i) {
        input.topRows(d * p) = state;
        input.bottomRows(d) = noise[i];
        ForwardTape* step_tape = tape != nullptr ? &tape->steps[i] : nullptr;
        if (tape != nullptr) {
            tape->noise_rows_read.push_back(i);
        }
        outputs.push_back(forward_batch(params, input, step_tape));
        if (p > 1) {
            state.topRows(d * (p - 1)) = state.bottomRows(d * (p - 1)).eval();
        }
        state.bottomRows(d) = outputs.back();
    }
    return outputs;
}

Path rollout(const ArfnnParams& params, const Path& x_past, std::size_t q, const Path& noise) {
    const auto& shape = params.shape();
    if (q < 1) {
        throw DomainError("rollout: q must be at least 1");
    }
    if (static_cast<std::size_t>(x_past.rows()) != shape.lags ||
        static_cast<std::size_t>(x_past.cols()) != shape.dim) {
        throw ShapeError("rollout: x_past must be p x d");
    }
    if (static_cast<std::size_t>(noise.rows()) != q ||
        static_cast<std::size_t>(noise.cols()) != shape.dim) {
        throw ShapeError("rollout: noise must be q x d");
    }
    const Path past_copy = x_past;
    const Eigen::MatrixXd packed = pack_pasts(std::span<const Path>(&past_copy, 1));
    std::vector<Eigen::MatrixXd> z;
    z.reserve(q);
    for (std::size_t i = 0; i < q; ++i) {
        z.emplace_back(noise.row(static_cast<Eigen::Index>(i)).transpose());
    }
    const auto outputs = rollout_batch(params, packed, z);
    Path result(static_cast<Eigen::Index>(q), x_past.cols());
    for (std::size_t i = 0; i < q; ++i) {
        result.row(static_cast<Eigen::Index>(i)) = outputs[i].col(0).transpose();
    }
    return result;
}

ArfnnParams rollout_backward(const ArfnnParams& params, const RolloutTape& tape,
                             std::span<const Eigen::MatrixXd> output_grads) {
    const auto& shape = params.shape();
    if (!(tape.shape == shape) || output_grads.size() != tape.steps.size()) {
        throw ShapeError("rollout_backward: tape does not match params or gradients");
    }
    const auto d = static_cast<Eigen::Index>(shape.dim);
    const auto p = static_cast<Eigen::Index>(shape.lags);
    const std::size_t q = tape.steps.size();

    // Gradient w.r.t. every generated row; past rows are constants.
    std::vector<Eigen::MatrixXd> g_out(output_grads.begin(), output_grads.end());
    ArfnnParams grads(shape);
    Eigen::MatrixXd g_input;
    for (std::size_t i = q; i-- > 0;) {
        grads.flat() += backward(params, tape.steps[i], g_out[i], &g_input).flat();
        // Input lag slot j (0 = oldest) of step i holds sequence row i + j,
        // which is generated output (i + j - p) when i + j >= p.
        for (Eigen::Index j = 0; j < p; ++j) {
            const Eigen::Index seq = static_cast<Eigen::Index>(i) + j;
            if (seq >= p) {
                g_out[static_cast<std::size_t>(seq - p)] += g_input.middleRows(j * d, d);
            }
        }
    }
    return grads;
}

Eigen::MatrixXd pack_pasts(std::span<const Path> pasts) {
    if (pasts.empty()) {
        throw ShapeError("pack_pasts: no windows");
    }
    const Eigen::Index p = pasts.front().rows();
    const Eigen::Index d = pasts.front().cols();
    Eigen::MatrixXd packed(p * d, static_cast<Eigen::Index>(pasts.size()));
    for (std::size_t b = 0; b < pasts.size(); ++b) {
        const auto& w = pasts[b];
        if (w.rows() != p || w.cols() != d) {
            throw ShapeError("pack_pasts: windows differ in shape");
        }
        for (Eigen::Index t = 0; t < p; ++t) {
            packed.block(t * d, static_cast<Eigen::Index>(b), d, 1) = w.row(t).transpose();
        }
    }
    return packed;
}

AdamState AdamState::for_params(const ArfnnParams& params, double learning_rate) {
    AdamState state;
    state.first_moment = Eigen::VectorXd::Zero(params.flat().size());
    state.second_moment = Eigen::VectorXd::Zero(params.flat().size());
    state.learning_rate = learning_rate;
    return state;
}

void adam_step(ArfnnParams& params, const ArfnnParams& grads, AdamState& state) {
    const Eigen::VectorXd& g = grads.flat();
    if (g.size() != params.flat().size() || state.first_moment.size() != g.size() ||
        state.second_moment.size() != g.size()) {
        throw ShapeError("adam_step: gradient, state and params differ in size");
    }
    if (!g.allFinite()) {
        throw DivergenceError("adam_step: non-finite gradient");
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * g;
    state.second_moment =
        state.beta2 * state.second_moment + (1.0 - state.beta2) * g.cwiseProduct(g);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    params.flat().array() -= state.learning_rate * (state.first_moment.array() / correction1) /
                             ((state.second_moment.array() / correction2).sqrt() + state.epsilon);
    for (int layer = 1; layer <= 3; ++layer) {
        if (params.slope(layer) < 0.0) {
            params.slope(layer) = 0.0;
        }
    }
}

}  // namespace sigcwgan
