#pragma once

#include "sigcwgan/signature.hpp"
#include "sigcwgan/timeseries.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sigcwgan {

/// A conditioning past (p x d) and the future that followed it (q x d).
struct Window {
    Path past;
    Path future;
};

/// All T-p-q+1 overlapping (past, future) pairs in time order.
/// Throws DomainError when T < p + q.
std::vector<Window> make_windows(const TimeSeries& x, std::size_t p, std::size_t q);

/// Row i holds signature_features(windows[i].past) (resp. future).
Eigen::MatrixXd past_feature_matrix(std::span<const Window> windows,
                                    const TransformPipeline& pipeline);
Eigen::MatrixXd future_feature_matrix(std::span<const Window> windows,
                                      const TransformPipeline& pipeline);
Eigen::MatrixXd feature_matrix(std::span<const Path> paths, const TransformPipeline& pipeline);

/// Produces one synthetic future per window, with window.future's shape.
using WindowSampler = std::function<std::vector<Path>(std::span<const Window>)>;

/// Sampler that returns each window's real future.
WindowSampler replay_sampler();

std::vector<Path> futures_of(std::span<const Window> windows);

}  // namespace sigcwgan
