#include "sigcwgan/windows.hpp"

#include "sigcwgan/errors.hpp"

#include <string>

namespace sigcwgan {

std::vector<Window> make_windows(const TimeSeries& x, std::size_t p, std::size_t q) {
    if (p < 1 || q < 1) {
        throw DomainError("make_windows: p and q must be positive");
    }
    const std::size_t T = x.length();
    if (T < p + q) {
        throw DomainError("make_windows: series of length " + std::to_string(T) +
                          " is shorter than p + q = " + std::to_string(p + q));
    }
    std::vector<Window> windows;
    windows.reserve(T - p - q + 1);
    const auto pp = static_cast<Eigen::Index>(p);
    const auto qq = static_cast<Eigen::Index>(q);
    for (std::size_t start = 0; start + p + q <= T; ++start) {
        const auto s = static_cast<Eigen::Index>(start);
        windows.push_back({x.values.middleRows(s, pp), x.values.middleRows(s + pp, qq)});
    }
    return windows;
}

Eigen::MatrixXd feature_matrix(std::span<const Path> paths, const TransformPipeline& pipeline) {
    if (paths.empty()) {
        throw ShapeError("feature_matrix: no paths");
    }
    const auto width = static_cast<Eigen::Index>(
        pipeline.feature_size(static_cast<std::size_t>(paths.front().cols())));
    Eigen::MatrixXd out(static_cast<Eigen::Index>(paths.size()), width);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto f = signature_features(paths[i], pipeline);
        if (static_cast<Eigen::Index>(f.size()) != width) {
            throw ShapeError("feature_matrix: paths differ in dimension");
        }
        out.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(f.data(), width);
    }
    return out;
}

Eigen::MatrixXd past_feature_matrix(std::span<const Window> windows,
                                    const TransformPipeline& pipeline) {
    std::vector<Path> pasts;
    pasts.reserve(windows.size());
    for (const auto& w : windows) {
        pasts.push_back(w.past);
    }
    return feature_matrix(pasts, pipeline);
}

Eigen::MatrixXd future_feature_matrix(std::span<const Window> windows,
                                      const TransformPipeline& pipeline) {
    return feature_matrix(futures_of(windows), pipeline);
}

std::vector<Path> futures_of(std::span<const Window> windows) {
    std::vector<Path> futures;
    futures.reserve(windows.size());
    for (const auto& w : windows) {
        futures.push_back(w.future);
    }
    return futures;
}

WindowSampler replay_sampler() {
    return [](std::span<const Window> windows) { return futures_of(windows); };
}

}  // namespace sigcwgan
