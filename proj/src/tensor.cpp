#include "sigcwgan/tensor.hpp"

#include "sigcwgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace sigcwgan {

std::size_t truncated_size(std::size_t dim, std::size_t degree) {
    std::size_t total = 0;
    std::size_t level = 1;
    for (std::size_t k = 0; k <= degree; ++k) {
        total += level;
        level *= dim;
    }
    return total;
}

TruncatedTensor::TruncatedTensor(std::size_t dim, std::size_t degree)
    : dim_(dim), degree_(degree) {
    if (dim == 0) {
        throw DomainError("TruncatedTensor: dim must be positive");
    }
    offsets_.reserve(degree + 2);
    std::size_t offset = 0;
    std::size_t level = 1;
    for (std::size_t k = 0; k <= degree; ++k) {
        offsets_.push_back(offset);
        offset += level;
        level *= dim;
    }
    offsets_.push_back(offset);
    data_.assign(offset, 0.0);
}

TruncatedTensor TruncatedTensor::unit(std::size_t dim, std::size_t degree) {
    TruncatedTensor t(dim, degree);
    t.data_[0] = 1.0;
    return t;
}

std::span<double> TruncatedTensor::level(std::size_t k) {
    if (k > degree_) {
        throw DomainError("level " + std::to_string(k) + " exceeds degree " +
                          std::to_string(degree_));
    }
    return std::span<double>(data_).subspan(offsets_[k], offsets_[k + 1] - offsets_[k]);
}

std::span<const double> TruncatedTensor::level(std::size_t k) const {
    if (k > degree_) {
        throw DomainError("level " + std::to_string(k) + " exceeds degree " +
                          std::to_string(degree_));
    }
    return std::span<const double>(data_).subspan(offsets_[k],
                                                  offsets_[k + 1] - offsets_[k]);
}

namespace {

void require_compatible(const TruncatedTensor& a, const TruncatedTensor& b, const char* op) {
    if (a.dim() != b.dim() || a.degree() != b.degree()) {
        throw ShapeError(std::string(op) + ": operands differ in dim or degree (" +
                         std::to_string(a.dim()) + "," + std::to_string(a.degree()) +
                         ") vs (" + std::to_string(b.dim()) + "," +
                         std::to_string(b.degree()) + ")");
    }
}

}  // namespace

TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b) {
    require_compatible(a, b, "tensor_mul");
    const std::size_t degree = a.degree();
    TruncatedTensor c(a.dim(), degree);
    for (std::size_t k = 0; k <= degree; ++k) {
        auto out = c.level(k);
        for (std::size_t i = 0; i <= k; ++i) {
            const auto left = a.level(i);
            const auto right = b.level(k - i);
            const std::size_t width = right.size();
            for (std::size_t I = 0; I < left.size(); ++I) {
                const double scale = left[I];
                if (scale == 0.0) {
                    continue;
                }
                double* row = out.data() + I * width;
                for (std::size_t J = 0; J < width; ++J) {
                    row[J] += scale * right[J];
                }
            }
        }
    }
    return c;
}

void tensor_mul_backward(const TruncatedTensor& a, const TruncatedTensor& b,
                         const TruncatedTensor& grad_c, TruncatedTensor& grad_a,
                         TruncatedTensor& grad_b) {
    require_compatible(a, b, "tensor_mul_backward");
    require_compatible(a, grad_c, "tensor_mul_backward");
    require_compatible(a, grad_a, "tensor_mul_backward");
    require_compatible(a, grad_b, "tensor_mul_backward");
    const std::size_t degree = a.degree();
    for (std::size_t k = 0; k <= degree; ++k) {
        const auto g = grad_c.level(k);
        for (std::size_t i = 0; i <= k; ++i) {
            const auto left = a.level(i);
            const auto right = b.level(k - i);
            auto g_left = grad_a.level(i);
            auto g_right = grad_b.level(k - i);
            const std::size_t width = right.size();
            for (std::size_t I = 0; I < left.size(); ++I) {
                const double* row = g.data() + I * width;
                double acc = 0.0;
                for (std::size_t J = 0; J < width; ++J) {
                    acc += row[J] * right[J];
                    g_right[J] += row[J] * left[I];
                }
                g_left[I] += acc;
            }
        }
    }
}

TruncatedTensor tensor_exp(std::span<const double> increment, std::size_t degree) {
    const std::size_t dim = increment.size();
    for (double v : increment) {
        if (!std::isfinite(v)) {
            throw DomainError("tensor_exp: non-finite increment");
        }
    }
    TruncatedTensor e = TruncatedTensor::unit(dim, degree);
    for (std::size_t k = 1; k <= degree; ++k) {
        const auto prev = std::as_const(e).level(k - 1);
        auto cur = e.level(k);
        const double inv_k = 1.0 / static_cast<double>(k);
        for (std::size_t I = 0; I < prev.size(); ++I) {
            const double scale = prev[I] * inv_k;
            for (std::size_t m = 0; m < dim; ++m) {
                cur[I * dim + m] = scale * increment[m];
            }
        }
    }
    return e;
}

void tensor_exp_backward(std::span<const double> increment, const TruncatedTensor& grad_e,
                         std::span<double> grad_increment) {
    const std::size_t dim = increment.size();
    if (grad_e.dim() != dim || grad_increment.size() != dim) {
        throw ShapeError("tensor_exp_backward: dimension mismatch");
    }
    const std::size_t degree = grad_e.degree();
    const TruncatedTensor e = tensor_exp(increment, degree);
    TruncatedTensor g = grad_e;
    for (std::size_t k = degree; k >= 1; --k) {
        const auto prev = e.level(k - 1);
        const auto g_cur = std::as_const(g).level(k);
        auto g_prev = g.level(k - 1);
        const double inv_k = 1.0 / static_cast<double>(k);
        for (std::size_t I = 0; I < prev.size(); ++I) {
            double acc = 0.0;
            for (std::size_t m = 0; m < dim; ++m) {
                const double gv = g_cur[I * dim + m] * inv_k;
                grad_increment[m] += gv * prev[I];
                acc += gv * increment[m];
            }
            g_prev[I] += acc;
        }
    }
}

double level_norm(const TruncatedTensor& a, std::size_t m) {
    double sum = 0.0;
    for (double v : a.level(m)) {
        sum += v * v;
    }
    return std::sqrt(sum);
}

double full_l2_norm(const TruncatedTensor& a) {
    double sum = 0.0;
    for (double v : a.coefficients()) {
        sum += v * v;
    }
    return std::sqrt(sum);
}

std::vector<double> flatten(const TruncatedTensor& a) {
    const auto c = a.coefficients();
    return {c.begin(), c.end()};
}

TruncatedTensor unflatten(std::span<const double> v, std::size_t dim, std::size_t degree) {
    TruncatedTensor t(dim, degree);
    if (v.size() != t.size()) {
        throw ShapeError("unflatten: expected " + std::to_string(t.size()) +
                         " coefficients, got " + std::to_string(v.size()));
    }
    std::copy(v.begin(), v.end(), t.coefficients().begin());
    return t;
}

}  // namespace sigcwgan
