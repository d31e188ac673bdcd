#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sigcwgan {

/// Number of coefficients of a tensor truncated at `degree` over R^dim:
/// 1 + d + d^2 + ... + d^M.
std::size_t truncated_size(std::size_t dim, std::size_t degree);

/// Element of the tensor algebra over R^d truncated at degree M.
///
/// Coefficients are stored densely, level-major; inside level k the
/// multi-index (i1, ..., ik) maps to i1 d^{k-1} + ... + ik (lexicographic).
/// This storage order is also the flatten() order.
class TruncatedTensor {
public:
    /// Zero tensor.
    TruncatedTensor(std::size_t dim, std::size_t degree);

    static TruncatedTensor unit(std::size_t dim, std::size_t degree);

    std::size_t dim() const { return dim_; }
    std::size_t degree() const { return degree_; }
    std::size_t size() const { return data_.size(); }

    std::span<double> level(std::size_t k);
    std::span<const double> level(std::size_t k) const;

    std::span<double> coefficients() { return data_; }
    std::span<const double> coefficients() const { return data_; }

    bool operator==(const TruncatedTensor&) const = default;

private:
    std::size_t dim_;
    std::size_t degree_;
    std::vector<std::size_t> offsets_;
    std::vector<double> data_;
};

inline TruncatedTensor unit(std::size_t dim, std::size_t degree) {
    return TruncatedTensor::unit(dim, degree);
}

/// Truncated product: level k of the result is sum_{i+j=k} a_i (x) b_j.
/// Throws ShapeError on dim/degree mismatch.
TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b);

/// Gradients of a scalar loss through c = tensor_mul(a, b), accumulated into
/// grad_a and grad_b (which must already have the right shape).
void tensor_mul_backward(const TruncatedTensor& a, const TruncatedTensor& b,
                         const TruncatedTensor& grad_c, TruncatedTensor& grad_a,
                         TruncatedTensor& grad_b);

/// Signature of a single linear segment: level k is increment^{(x)k} / k!.
TruncatedTensor tensor_exp(std::span<const double> increment, std::size_t degree);

/// Accumulates d loss / d increment for e = tensor_exp(increment, M) into grad_increment.
void tensor_exp_backward(std::span<const double> increment, const TruncatedTensor& grad_e,
                         std::span<double> grad_increment);

/// l2 norm of level m; throws DomainError when m > degree.
double level_norm(const TruncatedTensor& a, std::size_t m);

double full_l2_norm(const TruncatedTensor& a);

std::vector<double> flatten(const TruncatedTensor& a);

/// Inverse of flatten; throws ShapeError on a wrong-length vector.
TruncatedTensor unflatten(std::span<const double> v, std::size_t dim, std::size_t degree);

}  // namespace sigcwgan
