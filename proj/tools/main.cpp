#include "sigcwgan/errors.hpp"
#include "sigcwgan/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace sigcwgan;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::optional<std::string> output_dir;
    std::optional<std::size_t> batch_size;
    std::optional<std::size_t> mc_samples;
    std::optional<double> learning_rate;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Override the top-level seed");
    cmd->add_option("--output-dir", o.output_dir, "Override the output directory");
}

void add_train_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--steps", o.steps, "Number of generator updates");
    cmd->add_option("--batch-size", o.batch_size, "Windows per update");
    cmd->add_option("--mc-samples", o.mc_samples, "Rollouts per window");
    cmd->add_option("--lr", o.learning_rate, "Adam learning rate");
}

ExperimentConfig resolve(const std::string& path, const Overrides& o) {
    ExperimentConfig c = load_experiment(path);
    if (o.seed) {
        // A seed on the command line reseeds both data and model.
        nlohmann::json j = experiment_to_json(c);
        j["seed"] = *o.seed;
        j["model"]["seed"] = *o.seed;
        if (j["dataset"].contains("seed")) j["dataset"]["seed"] = *o.seed;
        c = experiment_from_json(j);
    }
    if (o.steps) c.model.steps = *o.steps;
    if (o.batch_size) c.model.batch_size = *o.batch_size;
    if (o.mc_samples) c.model.mc_samples = *o.mc_samples;
    if (o.learning_rate) c.model.learning_rate = *o.learning_rate;
    if (o.output_dir) c.output_dir = *o.output_dir;
    c.model.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional signature-based generative models for time series"};
    app.require_subcommand(1);

    Overrides overrides;
    std::string config_path;

    auto* simulate = app.add_subcommand("simulate", "Generate or ingest the dataset of a config");
    simulate->add_option("config", config_path, "Experiment config (JSON)")->required();
    add_overrides(simulate, overrides);

    auto* train = app.add_subcommand("train", "Train a generator");
    train->add_option("config", config_path, "Experiment config (JSON)")->required();
    add_overrides(train, overrides);
    add_train_overrides(train, overrides);

    std::string checkpoint;
    bool replay = false;
    auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint against the real data");
    evaluate->add_option("config", config_path, "Experiment config (JSON)")->required();
    evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file");
    evaluate->add_flag("--replay", replay, "Use the real futures as the synthetic side");
    add_overrides(evaluate, overrides);

    SampleRequest sample_request;
    auto* sample = app.add_subcommand("sample", "Draw futures conditioned on a past window");
    sample->add_option("--checkpoint", sample_request.checkpoint, "Checkpoint file")->required();
    sample->add_option("--past", sample_request.past_csv, "CSV with header t,x0,...")->required();
    sample->add_option("-q,--steps", sample_request.q, "Steps per sample");
    sample->add_option("-n,--count", sample_request.n, "Number of samples");
    sample->add_option("--seed", sample_request.seed, "Noise seed");
    sample->add_option("--output-dir", sample_request.output_dir, "Output directory");
    sample->add_option("--bins", sample_request.bins, "Histogram bins");

    std::vector<std::string> run_dirs;
    std::string report_out = "comparison.csv";
    auto* report = app.add_subcommand("report", "Tabulate report.json from several runs");
    report->add_option("runs", run_dirs, "Run directories")->required();
    report->add_option("-o,--output", report_out, "Comparison CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*simulate) return cmd_simulate(resolve(config_path, overrides), std::cout);
        if (*train) return cmd_train(resolve(config_path, overrides), std::cout);
        if (*evaluate) {
            if (!replay && checkpoint.empty()) {
                std::cerr << "error: evaluate needs --checkpoint or --replay\n";
                return kExitConfigError;
            }
            return cmd_evaluate(resolve(config_path, overrides), checkpoint, replay, std::cout);
        }
        if (*sample) return cmd_sample(sample_request, std::cout);
        if (*report) return cmd_report(run_dirs, report_out, std::cout);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
