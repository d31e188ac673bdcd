#include "sigcwgan/experiment.hpp"

#include "sigcwgan/checkpoint.hpp"
#include "sigcwgan/evalsuite.hpp"
#include "sigcwgan/windows.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace sigcwgan {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& section) {
    if (!j.is_object()) {
        throw DomainError(section + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw DomainError(section + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& field) {
    if (j.contains(key)) {
        field = j.at(key).get<T>();
    }
}

DatasetConfig dataset_from_json(const nlohmann::json& j, std::uint64_t default_seed) {
    DatasetConfig d;
    const std::string kind = j.value("kind", std::string("var1"));
    if (kind == "var1") {
        reject_unknown(j, {"kind", "dim", "phi", "sigma", "length", "seed"}, "dataset");
        d.kind = DatasetConfig::Kind::Var1;
        d.var.seed = default_seed;
        read_opt(j, "dim", d.var.dim);
        read_opt(j, "phi", d.var.phi);
        read_opt(j, "sigma", d.var.sigma);
        read_opt(j, "length", d.var.length);
        read_opt(j, "seed", d.var.seed);
        d.var.validate();
    } else if (kind == "arch") {
        reject_unknown(j, {"kind", "order", "alpha0", "alphas", "length", "seed"}, "dataset");
        d.kind = DatasetConfig::Kind::Arch;
        std::size_t order = 3;
        read_opt(j, "order", order);
        d.arch = ArchSpec::with_order(order);
        d.arch.seed = default_seed;
        read_opt(j, "alpha0", d.arch.alpha0);
        read_opt(j, "alphas", d.arch.alphas);
        read_opt(j, "length", d.arch.length);
        read_opt(j, "seed", d.arch.seed);
        d.arch.validate();
    } else if (kind == "csv") {
        reject_unknown(j, {"kind", "path", "columns"}, "dataset");
        d.kind = DatasetConfig::Kind::Csv;
        d.csv_path = j.at("path").get<std::string>();
        for (const auto& c : j.at("columns")) {
            reject_unknown(c, {"name", "mode"}, "dataset.columns");
            d.csv_columns.push_back(
                {c.at("name").get<std::string>(),
                 parse_ingest_mode(c.value("mode", std::string("log_return")))});
        }
        if (d.csv_columns.empty()) {
            throw DomainError("dataset: csv needs at least one column");
        }
    } else {
        throw DomainError("dataset: unknown kind '" + kind + "' (var1, arch, csv)");
    }
    return d;
}

nlohmann::json dataset_to_json(const DatasetConfig& d) {
    switch (d.kind) {
        case DatasetConfig::Kind::Var1:
            return {{"kind", "var1"},       {"dim", d.var.dim},       {"phi", d.var.phi},
                    {"sigma", d.var.sigma}, {"length", d.var.length}, {"seed", d.var.seed}};
        case DatasetConfig::Kind::Arch:
            return {{"kind", "arch"},         {"order", d.arch.order},   {"alpha0", d.arch.alpha0},
                    {"alphas", d.arch.alphas}, {"length", d.arch.length}, {"seed", d.arch.seed}};
        case DatasetConfig::Kind::Csv: {
            nlohmann::json columns = nlohmann::json::array();
            for (const auto& c : d.csv_columns) {
                columns.push_back({{"name", c.name}, {"mode", to_string(c.mode)}});
            }
            return {{"kind", "csv"}, {"path", d.csv_path}, {"columns", columns}};
        }
    }
    return {};
}

std::string dataset_tag(const DatasetConfig& d) {
    std::ostringstream out;
    switch (d.kind) {
        case DatasetConfig::Kind::Var1:
            out << "var1(d=" << d.var.dim << ",phi=" << d.var.phi << ",sigma=" << d.var.sigma << ")";
            break;
        case DatasetConfig::Kind::Arch:
            out << "arch(p=" << d.arch.order << ")";
            break;
        case DatasetConfig::Kind::Csv:
            out << "csv(" << fs::path(d.csv_path).filename().string() << ")";
            break;
    }
    return out.str();
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

fs::path prepare_output(const ExperimentConfig& config) {
    const fs::path dir = resolve_output_dir(config);
    fs::create_directories(dir);
    ExperimentConfig echo = config;
    echo.output_dir = dir.string();
    write_json(dir / "config.json", experiment_to_json(echo));
    return dir;
}

void print_summary(const TimeSeries& x, std::ostream& log) {
    log << "series: T=" << x.length() << " d=" << x.dim() << '\n';
    const auto acf = x.length() >= 2 ? series_lag1_autocorrelation(x) : std::vector<double>{};
    for (Eigen::Index i = 0; i < x.values.cols(); ++i) {
        const auto col = x.values.col(i);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().mean());
        log << "  x" << i << ": mean=" << mean << " sd=" << sd;
        if (!acf.empty()) log << " acf1=" << acf[static_cast<std::size_t>(i)];
        log << '\n';
    }
}

}  // namespace

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    reject_unknown(j, {"name", "seed", "output_dir", "dataset", "model", "eval"}, "config");
    if (!j.contains("seed")) {
        throw DomainError("config: a top-level seed is required");
    }
    ExperimentConfig c;
    try {
        read_opt(j, "name", c.name);
        read_opt(j, "seed", c.seed);
        read_opt(j, "output_dir", c.output_dir);
        c.dataset = dataset_from_json(j.value("dataset", nlohmann::json::object()), c.seed);
        nlohmann::json model = j.value("model", nlohmann::json::object());
        if (!model.contains("seed")) {
            model["seed"] = c.seed;
        }
        c.model = config_from_json(model);
        c.model.validate();
        if (j.contains("eval")) {
            const auto& e = j.at("eval");
            reject_unknown(e, {"bins", "report"}, "eval");
            read_opt(e, "bins", c.bins);
            read_opt(e, "report", c.report);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("config: ") + e.what());
    }
    if (c.bins < 1) {
        throw DomainError("eval.bins must be >= 1");
    }
    return c;
}

nlohmann::json experiment_to_json(const ExperimentConfig& c) {
    return {{"name", c.name},
            {"seed", c.seed},
            {"output_dir", c.output_dir},
            {"dataset", dataset_to_json(c.dataset)},
            {"model", config_to_json(c.model)},
            {"eval", {{"bins", c.bins}, {"report", c.report}}}};
}

ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot open config " + path);
    }
    try {
        return experiment_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError("config " + path + " is not valid JSON: " + e.what());
    }
}

std::string resolve_output_dir(const ExperimentConfig& config) {
    fs::path dir = config.output_dir.empty() ? fs::path(config.name) : fs::path(config.output_dir);
    if (dir.is_relative()) {
        const char* root = std::getenv(kOutputRootEnv);
        if (root != nullptr && *root != '\0') {
            dir = fs::path(root) / dir;
        } else if (config.output_dir.empty()) {
            dir = fs::path("runs") / dir;
        }
    }
    return dir.string();
}

TimeSeries load_dataset(const ExperimentConfig& config, std::size_t* dropped_rows) {
    switch (config.dataset.kind) {
        case DatasetConfig::Kind::Var1: return var1_simulate(config.dataset.var);
        case DatasetConfig::Kind::Arch: return arch_simulate(config.dataset.arch);
        case DatasetConfig::Kind::Csv: {
            auto result = ingest_csv(config.dataset.csv_path, config.dataset.csv_columns);
            if (dropped_rows != nullptr) *dropped_rows = result.dropped_rows;
            return std::move(result.series);
        }
    }
    throw DomainError("unknown dataset kind");
}

int cmd_simulate(const ExperimentConfig& config, std::ostream& log) {
    std::size_t dropped = 0;
    const TimeSeries series = load_dataset(config, &dropped);
    const fs::path dir = prepare_output(config);
    write_series_csv((dir / "series.csv").string(), series);
    log << "dataset " << dataset_tag(config.dataset) << " -> " << (dir / "series.csv").string()
        << '\n';
    if (dropped > 0) {
        log << "dropped " << dropped << " rows with missing values\n";
    }
    print_summary(series, log);
    return kExitOk;
}

int cmd_train(const ExperimentConfig& config, std::ostream& log) {
    const TimeSeries series = load_dataset(config);
    const fs::path dir = prepare_output(config);
    log << "training on " << dataset_tag(config.dataset) << " (T=" << series.length()
        << ") for " << config.model.steps << " updates\n";
    try {
        TrainResult result = train(series, config.model);
        save_checkpoint((dir / "checkpoint.json").string(),
                        Checkpoint{config.model, result.seeds, result.params, result.sig_map});
        write_loss_history((dir / "history.csv").string(), result.history);
        write_snapshots((dir / "snapshots.csv").string(), result.history);
        write_timing((dir / "timing.csv").string(), result.history);
        if (!result.history.snapshots.empty()) {
            const auto& s = result.history.snapshots.back();
            log << "step " << s.step << ": sig_w1=" << s.sig_w1 << " acf=" << s.acf
                << " marginal=" << s.marginal << '\n';
        }
        if (!result.history.wall_seconds.empty()) {
            log << "wall time " << result.history.wall_seconds.back() << " s\n";
        }
    } catch (const TrainingDivergedError& e) {
        write_loss_history((dir / "history.csv").string(), e.history());
        write_snapshots((dir / "snapshots.csv").string(), e.history());
        write_timing((dir / "timing.csv").string(), e.history());
        log << "error: " << e.what() << '\n';
        return kExitDiverged;
    }
    log << "checkpoint -> " << (dir / "checkpoint.json").string() << '\n';
    return kExitOk;
}

int cmd_evaluate(const ExperimentConfig& config, const std::string& checkpoint_path, bool replay,
                 std::ostream& log) {
    const TimeSeries series = load_dataset(config);
    EvalConfig eval;
    eval.p = config.model.p;
    eval.q = config.model.q;
    eval.past_pipeline = config.model.past_pipeline;
    eval.future_pipeline = config.model.future_pipeline;
    eval.bins = config.bins;
    eval.ridge = config.model.ridge;
    eval.dataset = dataset_tag(config.dataset);

    WindowSampler sampler;
    if (replay) {
        sampler = replay_sampler();
    } else {
        const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
        if (checkpoint.params.shape().dim != series.dim() ||
            checkpoint.params.shape().lags != config.model.p) {
            throw DomainError("checkpoint generator does not match the dataset/config");
        }
        sampler = generator_sampler(checkpoint.params, checkpoint.seeds.evaluation);
    }
    const fs::path dir = prepare_output(config);
    EvalReport report = full_report(series, sampler, eval);
    report.config["source"] = replay ? "replay" : checkpoint_path;
    write_report((dir / config.report).string(), report);

    const auto windows = make_windows(series, eval.p, eval.q);
    const auto real = futures_of(windows);
    const auto synth = sampler(windows);
    {
        std::ofstream out(dir / "marginal_hist.csv", std::ios::binary);
        out << "dim,bin_centre,real_density,synth_density\n";
        for (const auto& r : histogram_table(real, synth, eval.bins)) {
            out << r.dim << ',' << format_double(r.centre) << ',' << format_double(r.real_density)
                << ',' << format_double(r.synth_density) << '\n';
        }
    }
    {
        std::ofstream out(dir / "acf.csv", std::ios::binary);
        out << "dim,lag,real,synth\n";
        for (const auto& r : acf_table(real, synth)) {
            out << r.dim << ',' << r.lag << ',' << format_double(r.real) << ','
                << format_double(r.synth) << '\n';
        }
    }
    log << std::setprecision(6) << "marginal=" << report.marginal << " acf=" << report.acf
        << " cross_corr=" << report.cross_corr << " trtr=" << report.trtr_r2
        << " tstr=" << report.tstr_r2 << " r2_rel_err=" << report.r2_relative_error
        << " sig_w1=" << report.sig_w1 << '\n';
    log << "report -> " << (dir / config.report).string() << '\n';
    return kExitOk;
}

int cmd_sample(const SampleRequest& request, std::ostream& log) {
    const Checkpoint checkpoint = load_checkpoint(request.checkpoint);
    const TimeSeries past_series = read_series_csv(request.past_csv);
    const auto& shape = checkpoint.params.shape();
    if (past_series.length() < shape.lags) {
        throw DomainError("past window has " + std::to_string(past_series.length()) +
                          " rows, generator needs p=" + std::to_string(shape.lags));
    }
    if (past_series.dim() != shape.dim) {
        throw DomainError("past window dimension does not match the generator");
    }
    if (request.q < 1 || request.n < 1) {
        throw DomainError("sample: q and n must be >= 1");
    }
    const auto p = static_cast<Eigen::Index>(shape.lags);
    const Path past = past_series.values.bottomRows(p);
    std::vector<Window> windows(request.n,
                                Window{past, Path::Zero(static_cast<Eigen::Index>(request.q),
                                                        past.cols())});
    Rng rng(request.seed);
    const auto samples = sample_futures(checkpoint.params, windows, rng);

    const fs::path dir = request.output_dir.empty() ? fs::path(".") : fs::path(request.output_dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "samples.csv", std::ios::binary);
        out << "sample,step";
        for (std::size_t i = 0; i < shape.dim; ++i) out << ",x" << i;
        out << '\n';
        for (std::size_t s = 0; s < samples.size(); ++s) {
            for (Eigen::Index t = 0; t < samples[s].rows(); ++t) {
                out << s << ',' << t + 1;
                for (Eigen::Index i = 0; i < samples[s].cols(); ++i) {
                    out << ',' << format_double(samples[s](t, i));
                }
                out << '\n';
            }
        }
    }
    {
        // Marginal of the sampled values against the supplied past, e.g. one
        // long generated path versus the history it was seeded from.
        std::vector<Path> reference{past_series.values};
        std::ofstream out(dir / "samples_hist.csv", std::ios::binary);
        out << "dim,bin_centre,reference_density,sample_density\n";
        for (const auto& r : histogram_table(reference, samples, request.bins)) {
            out << r.dim << ',' << format_double(r.centre) << ',' << format_double(r.real_density)
                << ',' << format_double(r.synth_density) << '\n';
        }
    }
    log << "wrote " << samples.size() << " samples of " << request.q << " steps to "
        << (dir / "samples.csv").string() << '\n';
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_path,
               std::ostream& log) {
    if (run_dirs.empty()) {
        throw DomainError("report: no run directories given");
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + out_path);
    }
    out << "run,dataset,marginal,acf,cross_corr,trtr_r2,tstr_r2,r2_relative_error,sig_w1\n";
    log << "| run | dataset | marginal | acf | cross-corr | TRTR R2 | TSTR R2 | R2 rel. err | Sig-W1 |\n"
        << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& run : run_dirs) {
        std::string report_name = "report.json";
        const fs::path config_path = fs::path(run) / "config.json";
        std::string name = fs::path(run).filename().string();
        if (fs::exists(config_path)) {
            const auto c = load_experiment(config_path.string());
            report_name = c.report;
            name = c.name;
        }
        const EvalReport r = read_report((fs::path(run) / report_name).string());
        out << name << ',' << r.dataset << ',' << format_double(r.marginal) << ','
            << format_double(r.acf) << ',' << format_double(r.cross_corr) << ','
            << format_double(r.trtr_r2) << ',' << format_double(r.tstr_r2) << ','
            << format_double(r.r2_relative_error) << ',' << format_double(r.sig_w1) << '\n';
        log << std::setprecision(4) << "| " << name << " | " << r.dataset << " | " << r.marginal
            << " | " << r.acf << " | " << r.cross_corr << " | " << r.trtr_r2 << " | "
            << r.tstr_r2 << " | " << r.r2_relative_error << " | " << r.sig_w1 << " |\n";
    }
    return kExitOk;
}

}  // namespace sigcwgan
