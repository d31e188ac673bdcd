#pragma once

#include "sigcwgan/arfnn.hpp"
#include "sigcwgan/errors.hpp"
#include "sigcwgan/random.hpp"
#include "sigcwgan/sigregress.hpp"
#include "sigcwgan/signature.hpp"
#include "sigcwgan/timeseries.hpp"
#include "sigcwgan/windows.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sigcwgan {

struct TrainConfig {
    std::size_t p = 3;
    std::size_t q = 3;
    TransformPipeline past_pipeline = default_pipeline(2);
    TransformPipeline future_pipeline = default_pipeline(2);
    std::size_t batch_size = 128;
    std::size_t mc_samples = 64;
    std::size_t steps = 1000;
    double learning_rate = 1e-3;
    /// Negative selects default_ridge on the past features.
    double ridge = -1.0;
    std::size_t hidden = 50;
    std::uint64_t seed = 0;
    std::size_t snapshot_interval = 50;
    /// Windows (evenly spaced) used for the periodic evaluation snapshots.
    std::size_t snapshot_windows = 2000;
    std::size_t bins = 50;

    /// Throws DomainError when a field is out of range.
    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

nlohmann::json config_to_json(const TrainConfig& config);
/// Missing keys keep their defaults; unknown keys raise DomainError.
TrainConfig config_from_json(const nlohmann::json& j);

struct Snapshot {
    std::size_t step;
    double sig_w1;
    double acf;
    double marginal;

    bool operator==(const Snapshot&) const = default;
};

struct TrainHistory {
    std::vector<double> losses;  // losses[i] is the loss of update i + 1
    std::vector<Snapshot> snapshots;
    /// Seconds since training started, one per snapshot.
    std::vector<double> wall_seconds;
};

/// Random streams derived from TrainConfig::seed.
struct SeedLineage {
    std::uint64_t root = 0;
    std::uint64_t init = 0;
    std::uint64_t batches = 0;
    std::uint64_t noise = 0;
    std::uint64_t snapshots = 0;
    std::uint64_t evaluation = 0;

    static SeedLineage derive(std::uint64_t root);
    bool operator==(const SeedLineage&) const = default;
};

struct LossResult {
    double loss = 0.0;
    ArfnnParams gradients;
};

/// Conditional Sig-W1 loss on a batch of windows and its parameter gradients.
///
/// For every window the target is sig_map applied to the past signature
/// features; the model side is the mean future signature over mc_samples
/// rollouts. The loss is the batch mean of the l2 distances between the two.
/// Noise is drawn from `noise` step by step, column by column, so results
/// depend only on the generator state.
LossResult conditional_loss(const ArfnnParams& params, std::span<const Window> batch,
                            const LinearSigMap& sig_map, const TrainConfig& config, Rng& noise);

/// Loss only, same noise consumption as conditional_loss.
double conditional_loss_value(const ArfnnParams& params, std::span<const Window> batch,
                              const LinearSigMap& sig_map, const TrainConfig& config, Rng& noise);

/// One synthetic future per window from independent rollouts.
std::vector<Path> sample_futures(const ArfnnParams& params, std::span<const Window> windows,
                                 Rng& noise);

/// Sampler backed by the generator; each call draws from its own stream
/// seeded with `seed`.
WindowSampler generator_sampler(const ArfnnParams& params, std::uint64_t seed);

struct TrainResult {
    ArfnnParams params;
    LinearSigMap sig_map;
    TrainHistory history;
    SeedLineage seeds;
};

/// Raised when the loss or a gradient becomes non-finite; carries what was
/// recorded before the failure.
class TrainingDivergedError : public DivergenceError {
public:
    TrainingDivergedError(const std::string& what, TrainHistory partial)
        : DivergenceError(what), history_(std::move(partial)) {}
    const TrainHistory& history() const { return history_; }

private:
    TrainHistory history_;
};

/// Fits the conditional expected-signature regression once on all real
/// windows, then runs `steps` Adam updates on batches sampled uniformly with
/// replacement. Deterministic given config.seed.
TrainResult train(const TimeSeries& data, const TrainConfig& config);

}  // namespace sigcwgan
