#include "sigcwgan/signature.hpp"

#include "sigcwgan/errors.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace sigcwgan {

namespace {

void require_rows(const Path& x, Eigen::Index min_rows, const char* op) {
    if (x.rows() < min_rows) {
        throw ShapeError(std::string(op) + ": path needs at least " + std::to_string(min_rows) +
                         " rows, got " + std::to_string(x.rows()));
    }
    if (x.cols() < 1) {
        throw ShapeError(std::string(op) + ": path has zero dimension");
    }
    if (!x.allFinite()) {
        throw DomainError(std::string(op) + ": non-finite path entries");
    }
}

}  // namespace

Path time_augment(const Path& x) {
    require_rows(x, 1, "time_augment");
    const Eigen::Index T = x.rows();
    const Eigen::Index d = x.cols();
    Path y = Path::Zero(T + 1, d + 1);
    for (Eigen::Index t = 0; t < T; ++t) {
        y(t + 1, 0) = T == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(T - 1);
        y.block(t + 1, 1, 1, d) = x.row(t);
    }
    return y;
}

Path basepoint_zero(const Path& x) {
    require_rows(x, 1, "basepoint_zero");
    Path y = Path::Zero(x.rows() + 1, x.cols());
    y.bottomRows(x.rows()) = x;
    return y;
}

Path cumulative_sum_concat(const Path& x) {
    require_rows(x, 1, "cumulative_sum_concat");
    const Eigen::Index d = x.cols();
    Path y(x.rows(), 2 * d);
    y.leftCols(d) = x;
    Eigen::RowVectorXd running = Eigen::RowVectorXd::Zero(d);
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
        running += x.row(t);
        y.block(t, d, 1, d) = running;
    }
    return y;
}

Path lead_lag(const Path& x) {
    require_rows(x, 2, "lead_lag");
    const Eigen::Index T = x.rows();
    const Eigen::Index d = x.cols();
    Path y(2 * T - 1, 2 * d);
    for (Eigen::Index i = 0; i < T; ++i) {
        y.block(2 * i, 0, 1, d) = x.row(i);
        y.block(2 * i, d, 1, d) = x.row(i);
        if (i + 1 < T) {
            y.block(2 * i + 1, 0, 1, d) = x.row(i + 1);
            y.block(2 * i + 1, d, 1, d) = x.row(i);
        }
    }
    return y;
}

Path lag_add(const Path& x, std::size_t m) {
    require_rows(x, 1, "lag_add");
    const auto lag = static_cast<Eigen::Index>(m);
    if (m < 1 || lag >= x.rows()) {
        throw DomainError("lag_add: need 1 <= m < T, got m=" + std::to_string(m) +
                          ", T=" + std::to_string(x.rows()));
    }
    const Eigen::Index rows = x.rows() - lag;
    const Eigen::Index d = x.cols();
    Path y(rows, d * (lag + 1));
    for (Eigen::Index t = 0; t < rows; ++t) {
        for (Eigen::Index j = 0; j <= lag; ++j) {
            y.block(t, j * d, 1, d) = x.row(t + j);
        }
    }
    return y;
}

namespace {

Path apply_step(const Path& x, const TransformStep& step) {
    switch (step.kind) {
        case TransformKind::TimeAugment: return time_augment(x);
        case TransformKind::BasepointZero: return basepoint_zero(x);
        case TransformKind::CumulativeSumConcat: return cumulative_sum_concat(x);
        case TransformKind::LagAdd: return lag_add(x, step.lag);
        case TransformKind::LeadLag: return lead_lag(x);
    }
    throw DomainError("unknown transform");
}

// Adjoint of one step; `x` is the step's input.
Path step_backward(const Path& x, const TransformStep& step, const Path& g) {
    const Eigen::Index T = x.rows();
    const Eigen::Index d = x.cols();
    Path gx = Path::Zero(T, d);
    switch (step.kind) {
        case TransformKind::TimeAugment:
            gx = g.block(1, 1, T, d);
            break;
        case TransformKind::BasepointZero:
            gx = g.bottomRows(T);
            break;
        case TransformKind::CumulativeSumConcat: {
            Eigen::RowVectorXd tail = Eigen::RowVectorXd::Zero(d);
            for (Eigen::Index t = T - 1; t >= 0; --t) {
                tail += g.block(t, d, 1, d);
                gx.row(t) = g.block(t, 0, 1, d) + tail;
            }
            break;
        }
        case TransformKind::LagAdd: {
            const auto lag = static_cast<Eigen::Index>(step.lag);
            for (Eigen::Index t = 0; t < T - lag; ++t) {
                for (Eigen::Index j = 0; j <= lag; ++j) {
                    gx.row(t + j) += g.block(t, j * d, 1, d);
                }
            }
            break;
        }
        case TransformKind::LeadLag:
            for (Eigen::Index i = 0; i < T; ++i) {
                gx.row(i) += g.block(2 * i, 0, 1, d) + g.block(2 * i, d, 1, d);
                if (i + 1 < T) {
                    gx.row(i + 1) += g.block(2 * i + 1, 0, 1, d);
                    gx.row(i) += g.block(2 * i + 1, d, 1, d);
                }
            }
            break;
    }
    return gx;
}

}  // namespace

std::string TransformPipeline::describe() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        switch (steps[i].kind) {
            case TransformKind::TimeAugment: out << "time"; break;
            case TransformKind::BasepointZero: out << "basepoint"; break;
            case TransformKind::CumulativeSumConcat: out << "cumsum"; break;
            case TransformKind::LagAdd: out << "lag" << steps[i].lag; break;
            case TransformKind::LeadLag: out << "leadlag"; break;
        }
    }
    out << '@' << degree;
    return out.str();
}

TransformPipeline TransformPipeline::parse(const std::string& text) {
    const auto at = text.rfind('@');
    if (at == std::string::npos) {
        throw DomainError("pipeline '" + text + "' lacks '@degree'");
    }
    TransformPipeline pipeline;
    try {
        pipeline.degree = std::stoul(text.substr(at + 1));
    } catch (const std::exception&) {
        throw DomainError("pipeline '" + text + "' has a malformed degree");
    }
    std::istringstream in(text.substr(0, at));
    std::string token;
    while (std::getline(in, token, ',')) {
        if (token == "time") {
            pipeline.steps.push_back({TransformKind::TimeAugment});
        } else if (token == "basepoint") {
            pipeline.steps.push_back({TransformKind::BasepointZero});
        } else if (token == "cumsum") {
            pipeline.steps.push_back({TransformKind::CumulativeSumConcat});
        } else if (token == "leadlag") {
            pipeline.steps.push_back({TransformKind::LeadLag});
        } else if (token.rfind("lag", 0) == 0 && token.size() > 3) {
            std::size_t lag = 0;
            try {
                lag = std::stoul(token.substr(3));
            } catch (const std::exception&) {
                throw DomainError("pipeline step '" + token + "' has a malformed lag");
            }
            pipeline.steps.push_back({TransformKind::LagAdd, lag});
        } else {
            throw DomainError("unknown pipeline step '" + token + "'");
        }
    }
    if (pipeline.steps.empty() || pipeline.degree < 1) {
        throw DomainError("pipeline '" + text + "' must have steps and degree >= 1");
    }
    return pipeline;
}

std::size_t TransformPipeline::output_dim(std::size_t input_dim) const {
    std::size_t d = input_dim;
    for (const auto& step : steps) {
        switch (step.kind) {
            case TransformKind::TimeAugment: d += 1; break;
            case TransformKind::BasepointZero: break;
            case TransformKind::CumulativeSumConcat: d *= 2; break;
            case TransformKind::LagAdd: d *= step.lag + 1; break;
            case TransformKind::LeadLag: d *= 2; break;
        }
    }
    return d;
}

std::size_t TransformPipeline::output_length(std::size_t input_length) const {
    std::size_t T = input_length;
    for (const auto& step : steps) {
        switch (step.kind) {
            case TransformKind::TimeAugment:
            case TransformKind::BasepointZero: T += 1; break;
            case TransformKind::CumulativeSumConcat: break;
            case TransformKind::LagAdd: T = T > step.lag ? T - step.lag : 0; break;
            case TransformKind::LeadLag: T = T > 0 ? 2 * T - 1 : 0; break;
        }
    }
    return T;
}

std::size_t TransformPipeline::feature_size(std::size_t input_dim) const {
    return truncated_size(output_dim(input_dim), degree);
}

TransformPipeline default_pipeline(std::size_t degree) {
    return TransformPipeline{{{TransformKind::CumulativeSumConcat},
                              {TransformKind::LagAdd, 1},
                              {TransformKind::LeadLag}},
                             degree};
}

Path apply_pipeline(const Path& x, const TransformPipeline& pipeline) {
    if (pipeline.steps.empty()) {
        throw DomainError("apply_pipeline: empty transformation list");
    }
    require_rows(x, 1, "apply_pipeline");
    Path y = x;
    for (const auto& step : pipeline.steps) {
        y = apply_step(y, step);
    }
    return y;
}

Path apply_pipeline_backward(const Path& x, const TransformPipeline& pipeline,
                             const Path& grad_out) {
    std::vector<Path> inputs;
    inputs.reserve(pipeline.steps.size());
    Path y = x;
    for (const auto& step : pipeline.steps) {
        inputs.push_back(y);
        y = apply_step(y, step);
    }
    if (grad_out.rows() != y.rows() || grad_out.cols() != y.cols()) {
        throw ShapeError("apply_pipeline_backward: gradient shape mismatch");
    }
    Path g = grad_out;
    for (std::size_t i = pipeline.steps.size(); i-- > 0;) {
        g = step_backward(inputs[i], pipeline.steps[i], g);
    }
    return g;
}

TruncatedTensor path_signature(const Path& x, std::size_t degree) {
    require_rows(x, 2, "path_signature");
    if (degree < 1) {
        throw DomainError("path_signature: degree must be >= 1");
    }
    const auto d = static_cast<std::size_t>(x.cols());
    TruncatedTensor sig = TruncatedTensor::unit(d, degree);
    std::vector<double> increment(d);
    for (Eigen::Index t = 0; t + 1 < x.rows(); ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            increment[j] = x(t + 1, static_cast<Eigen::Index>(j)) -
                           x(t, static_cast<Eigen::Index>(j));
        }
        sig = tensor_mul(sig, tensor_exp(increment, degree));
    }
    return sig;
}

Path path_signature_backward(const Path& x, const TruncatedTensor& grad_signature) {
    require_rows(x, 2, "path_signature_backward");
    const auto d = static_cast<std::size_t>(x.cols());
    const std::size_t degree = grad_signature.degree();
    if (grad_signature.dim() != d) {
        throw ShapeError("path_signature_backward: gradient dim does not match path");
    }
    const auto segments = static_cast<std::size_t>(x.rows() - 1);

    std::vector<std::vector<double>> increments(segments, std::vector<double>(d));
    std::vector<TruncatedTensor> exps;
    std::vector<TruncatedTensor> prefixes;  // prefixes[i] = product of the first i exps
    exps.reserve(segments);
    prefixes.reserve(segments);
    prefixes.push_back(TruncatedTensor::unit(d, degree));
    for (std::size_t s = 0; s < segments; ++s) {
        const auto row = static_cast<Eigen::Index>(s);
        for (std::size_t j = 0; j < d; ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            increments[s][j] = x(row + 1, col) - x(row, col);
        }
        exps.push_back(tensor_exp(increments[s], degree));
        if (s + 1 < segments) {
            prefixes.push_back(tensor_mul(prefixes.back(), exps.back()));
        }
    }

    Path grad = Path::Zero(x.rows(), x.cols());
    TruncatedTensor g = grad_signature;
    std::vector<double> g_inc(d);
    for (std::size_t s = segments; s-- > 0;) {
        TruncatedTensor g_prefix(d, degree);
        TruncatedTensor g_exp(d, degree);
        tensor_mul_backward(prefixes[s], exps[s], g, g_prefix, g_exp);
        std::fill(g_inc.begin(), g_inc.end(), 0.0);
        tensor_exp_backward(increments[s], g_exp, g_inc);
        const auto row = static_cast<Eigen::Index>(s);
        for (std::size_t j = 0; j < d; ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            grad(row + 1, col) += g_inc[j];
            grad(row, col) -= g_inc[j];
        }
        g = std::move(g_prefix);
    }
    return grad;
}

std::vector<double> signature_features(const Path& x, const TransformPipeline& pipeline) {
    return flatten(path_signature(apply_pipeline(x, pipeline), pipeline.degree));
}

Path signature_features_backward(const Path& x, const TransformPipeline& pipeline,
                                 std::span<const double> grad_features) {
    const Path y = apply_pipeline(x, pipeline);
    const TruncatedTensor g =
        unflatten(grad_features, static_cast<std::size_t>(y.cols()), pipeline.degree);
    return apply_pipeline_backward(x, pipeline, path_signature_backward(y, g));
}

std::vector<double> expected_signature(std::span<const Path> batch,
                                       const TransformPipeline& pipeline) {
    if (batch.empty()) {
        throw DomainError("expected_signature: empty batch");
    }
    const Eigen::Index rows = batch.front().rows();
    const Eigen::Index cols = batch.front().cols();
    std::vector<double> mean;
    for (const auto& x : batch) {
        if (x.rows() != rows || x.cols() != cols) {
            throw ShapeError("expected_signature: series in the batch differ in shape");
        }
        const auto features = signature_features(x, pipeline);
        if (mean.empty()) {
            mean.assign(features.size(), 0.0);
        }
        for (std::size_t i = 0; i < features.size(); ++i) {
            mean[i] += features[i];
        }
    }
    const double n = static_cast<double>(batch.size());
    for (double& v : mean) {
        v /= n;
    }
    return mean;
}

double one_variation(const Path& x) {
    double total = 0.0;
    for (Eigen::Index t = 0; t + 1 < x.rows(); ++t) {
        total += (x.row(t + 1) - x.row(t)).norm();
    }
    return total;
}

}  // namespace sigcwgan
