#pragma once

#include "sigcwgan/datasets.hpp"
#include "sigcwgan/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sigcwgan {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfigError = 2,
    kExitDiverged = 3,
};

/// Environment variable naming the root for relative or missing output dirs.
inline constexpr const char* kOutputRootEnv = "SIGCWGAN_OUTPUT_ROOT";

struct DatasetConfig {
    enum class Kind { Var1, Arch, Csv };
    Kind kind = Kind::Var1;
    VarSpec var;
    ArchSpec arch;
    std::string csv_path;
    std::vector<CsvColumn> csv_columns;
};

/// One experiment = one output directory. See docs/config.md for the schema.
struct ExperimentConfig {
    std::string name = "experiment";
    std::uint64_t seed = 0;
    std::string output_dir;  // empty: $SIGCWGAN_OUTPUT_ROOT/name, else runs/name
    DatasetConfig dataset;
    TrainConfig model;
    std::size_t bins = 50;
    std::string report = "report.json";
};

/// Parses the JSON config. Sections may omit fields (defaults apply);
/// the top-level seed is required and is the default for dataset.seed and
/// model.seed. Unknown keys and invalid values raise DomainError.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment(const std::string& path);

/// Output directory after applying the environment default.
std::string resolve_output_dir(const ExperimentConfig& config);

/// Simulated or ingested series for the dataset section.
TimeSeries load_dataset(const ExperimentConfig& config, std::size_t* dropped_rows = nullptr);

/// Each command writes into resolve_output_dir(config), echoes the resolved
/// config there as config.json, logs to `log`, and returns an ExitCode.
int cmd_simulate(const ExperimentConfig& config, std::ostream& log);
int cmd_train(const ExperimentConfig& config, std::ostream& log);
/// With replay the synthetic side is the real futures (a sanity baseline).
int cmd_evaluate(const ExperimentConfig& config, const std::string& checkpoint_path, bool replay,
                 std::ostream& log);

struct SampleRequest {
    std::string checkpoint;
    std::string past_csv;
    std::size_t q = 1;
    std::size_t n = 1;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::size_t bins = 50;
};
/// Writes samples.csv (sample,step,x0..) and samples_hist.csv.
int cmd_sample(const SampleRequest& request, std::ostream& log);

/// Collects report.json from each run directory into a comparison table
/// (CSV at out_path, markdown on `log`).
int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_path,
               std::ostream& log);

}  // namespace sigcwgan
