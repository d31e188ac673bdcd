#include "sigcwgan/trainer.hpp"

#include "sigcwgan/evalsuite.hpp"
#include "sigcwgan/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace sigcwgan {

void TrainConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw DomainError("train config: " + what);
    };
    require(p >= 1, "p must be >= 1");
    require(q >= 1, "q must be >= 1");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(mc_samples >= 1, "mc_samples must be >= 1");
    require(hidden >= 1, "hidden must be >= 1");
    require(learning_rate > 0.0, "learning_rate must be positive");
    require(!past_pipeline.steps.empty() && past_pipeline.degree >= 1,
            "past pipeline needs steps and degree >= 1");
    require(!future_pipeline.steps.empty() && future_pipeline.degree >= 1,
            "future pipeline needs steps and degree >= 1");
    require(past_pipeline.output_length(p) >= 2,
            "past pipeline leaves fewer than two points for p=" + std::to_string(p));
    require(future_pipeline.output_length(q) >= 2,
            "future pipeline leaves fewer than two points for q=" + std::to_string(q));
    require(snapshot_interval >= 1, "snapshot_interval must be >= 1");
    require(snapshot_windows >= 1, "snapshot_windows must be >= 1");
    require(bins >= 1, "bins must be >= 1");
}

nlohmann::json config_to_json(const TrainConfig& c) {
    return {{"p", c.p},
            {"q", c.q},
            {"past_pipeline", c.past_pipeline.describe()},
            {"future_pipeline", c.future_pipeline.describe()},
            {"batch_size", c.batch_size},
            {"mc_samples", c.mc_samples},
            {"steps", c.steps},
            {"learning_rate", c.learning_rate},
            {"ridge", c.ridge},
            {"hidden", c.hidden},
            {"seed", c.seed},
            {"snapshot_interval", c.snapshot_interval},
            {"snapshot_windows", c.snapshot_windows},
            {"bins", c.bins}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw DomainError("train config must be a JSON object");
    }
    static const std::set<std::string> known = {
        "p",     "q",      "past_pipeline", "future_pipeline",   "batch_size",
        "mc_samples", "steps", "learning_rate", "ridge", "hidden", "seed",
        "snapshot_interval", "snapshot_windows", "bins"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw DomainError("train config: unknown key '" + key + "'");
        }
    }
    TrainConfig c;
    try {
        auto get = [&j](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        get("p", c.p);
        get("q", c.q);
        get("batch_size", c.batch_size);
        get("mc_samples", c.mc_samples);
        get("steps", c.steps);
        get("learning_rate", c.learning_rate);
        get("ridge", c.ridge);
        get("hidden", c.hidden);
        get("seed", c.seed);
        get("snapshot_interval", c.snapshot_interval);
        get("snapshot_windows", c.snapshot_windows);
        get("bins", c.bins);
        if (j.contains("past_pipeline")) {
            c.past_pipeline = TransformPipeline::parse(j.at("past_pipeline").get<std::string>());
        }
        if (j.contains("future_pipeline")) {
            c.future_pipeline =
                TransformPipeline::parse(j.at("future_pipeline").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("train config: ") + e.what());
    }
    return c;
}

SeedLineage SeedLineage::derive(std::uint64_t root) {
    Rng rng(root);
    SeedLineage s;
    s.root = root;
    s.init = rng.split();
    s.batches = rng.split();
    s.noise = rng.split();
    s.snapshots = rng.split();
    s.evaluation = rng.split();
    return s;
}

namespace {

std::vector<Eigen::MatrixXd> draw_noise(Rng& rng, std::size_t q, Eigen::Index dim,
                                        Eigen::Index columns) {
    std::vector<Eigen::MatrixXd> noise;
    noise.reserve(q);
    for (std::size_t i = 0; i < q; ++i) {
        Eigen::MatrixXd z(dim, columns);
        for (Eigen::Index c = 0; c < columns; ++c) {
            for (Eigen::Index k = 0; k < dim; ++k) {
                z(k, c) = rng.normal();
            }
        }
        noise.push_back(std::move(z));
    }
    return noise;
}

Path column_path(const std::vector<Eigen::MatrixXd>& outputs, Eigen::Index column) {
    Path path(static_cast<Eigen::Index>(outputs.size()), outputs.front().rows());
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        path.row(static_cast<Eigen::Index>(i)) = outputs[i].col(column).transpose();
    }
    return path;
}

void check_batch(const ArfnnParams& params, std::span<const Window> batch,
                 const LinearSigMap& sig_map, const TrainConfig& config) {
    const auto& shape = params.shape();
    if (batch.empty()) {
        throw DomainError("conditional_loss: empty batch");
    }
    if (config.mc_samples < 1) {
        throw DomainError("conditional_loss: mc_samples must be >= 1");
    }
    for (const auto& w : batch) {
        if (static_cast<std::size_t>(w.past.rows()) != shape.lags ||
            static_cast<std::size_t>(w.past.cols()) != shape.dim ||
            static_cast<std::size_t>(w.future.rows()) != config.q) {
            throw ShapeError("conditional_loss: window shape does not match generator/config");
        }
    }
    const auto past_width =
        static_cast<Eigen::Index>(config.past_pipeline.feature_size(shape.dim));
    const auto future_width =
        static_cast<Eigen::Index>(config.future_pipeline.feature_size(shape.dim));
    if (sig_map.input_dim() != past_width || sig_map.output_dim() != future_width) {
        throw ShapeError("conditional_loss: signature map does not match the pipelines");
    }
}

struct ForwardPass {
    std::vector<Eigen::MatrixXd> outputs;
    RolloutTape tape;
    std::vector<Eigen::VectorXd> differences;  // MC mean minus target, per window
    std::vector<double> norms;
    double loss = 0.0;
};

ForwardPass run_forward(const ArfnnParams& params, std::span<const Window> batch,
                        const LinearSigMap& sig_map, const TrainConfig& config, Rng& noise,
                        bool record) {
    check_batch(params, batch, sig_map, config);
    const auto n_mc = static_cast<Eigen::Index>(config.mc_samples);
    const auto batch_size = static_cast<Eigen::Index>(batch.size());
    const Eigen::Index columns = batch_size * n_mc;
    const auto d = static_cast<Eigen::Index>(params.shape().dim);

    const Eigen::MatrixXd pasts = pack_pasts(
        [&] {
            std::vector<Path> v;
            v.reserve(batch.size());
            for (const auto& w : batch) v.push_back(w.past);
            return v;
        }());
    Eigen::MatrixXd repeated(pasts.rows(), columns);
    for (Eigen::Index b = 0; b < batch_size; ++b) {
        repeated.middleCols(b * n_mc, n_mc) = pasts.col(b).replicate(1, n_mc);
    }

    ForwardPass pass;
    const auto z = draw_noise(noise, config.q, d, columns);
    pass.outputs = rollout_batch(params, repeated, z, record ? &pass.tape : nullptr);

    const auto width = static_cast<Eigen::Index>(config.future_pipeline.feature_size(params.shape().dim));
    for (Eigen::Index b = 0; b < batch_size; ++b) {
        const auto past_features = signature_features(batch[static_cast<std::size_t>(b)].past,
                                                      config.past_pipeline);
        const Eigen::VectorXd target = predict(
            sig_map, Eigen::Map<const Eigen::VectorXd>(past_features.data(),
                                                       static_cast<Eigen::Index>(past_features.size())));
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(width);
        for (Eigen::Index j = 0; j < n_mc; ++j) {
            const auto f =
                signature_features(column_path(pass.outputs, b * n_mc + j), config.future_pipeline);
            mean += Eigen::Map<const Eigen::VectorXd>(f.data(), width);
        }
        mean /= static_cast<double>(n_mc);
        pass.differences.push_back(mean - target);
        pass.norms.push_back(pass.differences.back().norm());
        pass.loss += pass.norms.back();
    }
    pass.loss /= static_cast<double>(batch_size);
    if (!std::isfinite(pass.loss)) {
        throw DivergenceError("conditional_loss: non-finite loss");
    }
    return pass;
}

}  // namespace

double conditional_loss_value(const ArfnnParams& params, std::span<const Window> batch,
                              const LinearSigMap& sig_map, const TrainConfig& config, Rng& noise) {
    return run_forward(params, batch, sig_map, config, noise, false).loss;
}

LossResult conditional_loss(const ArfnnParams& params, std::span<const Window> batch,
                            const LinearSigMap& sig_map, const TrainConfig& config, Rng& noise) {
    ForwardPass pass = run_forward(params, batch, sig_map, config, noise, true);
    const auto n_mc = static_cast<Eigen::Index>(config.mc_samples);
    const auto batch_size = static_cast<Eigen::Index>(batch.size());
    const auto d = params.shape().dim;

    std::vector<Eigen::MatrixXd> output_grads(
        config.q, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), batch_size * n_mc));
    for (Eigen::Index b = 0; b < batch_size; ++b) {
        const double norm = pass.norms[static_cast<std::size_t>(b)];
        if (norm == 0.0) {
            continue;  // l2 norm is not differentiable at 0; take the zero subgradient
        }
        const Eigen::VectorXd g_features = pass.differences[static_cast<std::size_t>(b)] /
                                           (norm * static_cast<double>(n_mc * batch_size));
        for (Eigen::Index j = 0; j < n_mc; ++j) {
            const Eigen::Index column = b * n_mc + j;
            const Path g_path = signature_features_backward(
                column_path(pass.outputs, column), config.future_pipeline,
                std::span<const double>(g_features.data(), static_cast<std::size_t>(g_features.size())));
            for (std::size_t i = 0; i < config.q; ++i) {
                output_grads[i].col(column) = g_path.row(static_cast<Eigen::Index>(i)).transpose();
            }
        }
    }
    return {pass.loss, rollout_backward(params, pass.tape, output_grads)};
}

std::vector<Path> sample_futures(const ArfnnParams& params, std::span<const Window> windows,
                                 Rng& noise) {
    if (windows.empty()) {
        return {};
    }
    const std::size_t q = static_cast<std::size_t>(windows.front().future.rows());
    const auto d = static_cast<Eigen::Index>(params.shape().dim);
    constexpr std::size_t kChunk = 4096;
    std::vector<Path> futures;
    futures.reserve(windows.size());
    for (std::size_t start = 0; start < windows.size(); start += kChunk) {
        const std::size_t count = std::min(kChunk, windows.size() - start);
        std::vector<Path> pasts;
        pasts.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const auto& w = windows[start + i];
            if (static_cast<std::size_t>(w.future.rows()) != q) {
                throw ShapeError("sample_futures: windows differ in horizon");
            }
            pasts.push_back(w.past);
        }
        const auto z = draw_noise(noise, q, d, static_cast<Eigen::Index>(count));
        const auto outputs = rollout_batch(params, pack_pasts(pasts), z);
        for (std::size_t i = 0; i < count; ++i) {
            futures.push_back(column_path(outputs, static_cast<Eigen::Index>(i)));
        }
    }
    return futures;
}

WindowSampler generator_sampler(const ArfnnParams& params, std::uint64_t seed) {
    return [params, seed](std::span<const Window> windows) {
        Rng rng(seed);
        return sample_futures(params, windows, rng);
    };
}

TrainResult train(const TimeSeries& data, const TrainConfig& config) {
    config.validate();
    const auto windows = make_windows(data, config.p, config.q);
    if (windows.size() < config.batch_size) {
        throw DomainError("train: only " + std::to_string(windows.size()) +
                          " windows for batch size " + std::to_string(config.batch_size));
    }
    const auto start_time = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    };

    const Eigen::MatrixXd past_features = past_feature_matrix(windows, config.past_pipeline);
    const Eigen::MatrixXd future_features = future_feature_matrix(windows, config.future_pipeline);
    const double lambda = config.ridge >= 0.0 ? config.ridge : default_ridge(past_features);

    const SeedLineage seeds = SeedLineage::derive(config.seed);
    Rng init_rng(seeds.init);
    TrainResult result{
        ArfnnParams::initialize({data.dim(), config.p, config.hidden}, init_rng),
        fit(past_features, future_features, lambda),
        {},
        seeds};
    AdamState adam = AdamState::for_params(result.params, config.learning_rate);

    std::vector<Window> eval_windows;
    const std::size_t n_eval = std::min(config.snapshot_windows, windows.size());
    eval_windows.reserve(n_eval);
    for (std::size_t i = 0; i < n_eval; ++i) {
        eval_windows.push_back(windows[i * windows.size() / n_eval]);
    }
    const auto eval_real = futures_of(eval_windows);
    const std::string descriptor = config.future_pipeline.describe();
    const SigStats real_stats{expected_signature(eval_real, config.future_pipeline),
                              eval_real.size(), descriptor};

    auto snapshot = [&](std::size_t step) {
        Rng rng(seeds.snapshots);
        const auto synth = sample_futures(result.params, eval_windows, rng);
        Snapshot s{step, 0.0, 0.0, 0.0};
        s.sig_w1 = sig_w1(real_stats, {expected_signature(synth, config.future_pipeline),
                                       synth.size(), descriptor});
        s.marginal = marginal_metric(eval_real, synth, config.bins);
        // A collapsed generator has zero variance; report the worst case.
        try {
            s.acf = config.q >= 2 ? acf_metric(eval_real, synth) : 0.0;
        } catch (const DomainError&) {
            s.acf = std::numeric_limits<double>::infinity();
        }
        result.history.snapshots.push_back(s);
        result.history.wall_seconds.push_back(elapsed());
    };

    snapshot(0);
    Rng batch_rng(seeds.batches);
    Rng noise_rng(seeds.noise);
    std::vector<Window> batch(config.batch_size);
    for (std::size_t step = 1; step <= config.steps; ++step) {
        for (auto& w : batch) {
            w = windows[batch_rng.below(windows.size())];
        }
        try {
            auto [loss, grads] = conditional_loss(result.params, batch, result.sig_map, config,
                                                  noise_rng);
            adam_step(result.params, grads, adam);
            result.history.losses.push_back(loss);
        } catch (const DivergenceError& e) {
            throw TrainingDivergedError("training diverged at step " + std::to_string(step) +
                                            ": " + e.what(),
                                        result.history);
        }
        if (step % config.snapshot_interval == 0) {
            snapshot(step);
        }
    }
    return result;
}

}  // namespace sigcwgan
