#pragma once

#include "sigcwgan/arfnn.hpp"
#include "sigcwgan/sigregress.hpp"
#include "sigcwgan/trainer.hpp"

#include <string>

namespace sigcwgan {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    TrainConfig config;
    SeedLineage seeds;
    ArfnnParams params;
    LinearSigMap sig_map;
};

/// Writes a versioned JSON checkpoint: config echo, seed lineage, the
/// signature map and every generator tensor with its shape. Doubles are
/// written in shortest round-trip form, so load(save(x)) is bit-exact.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);

/// Throws CorruptFileError on unreadable or malformed input and VersionError
/// on a version other than kCheckpointVersion.
Checkpoint load_checkpoint(const std::string& path);

/// history.csv: step,loss (one row per update).
void write_loss_history(const std::string& path, const TrainHistory& history);
/// snapshots.csv: step,sig_w1,acf,marginal.
void write_snapshots(const std::string& path, const TrainHistory& history);
/// timing.csv: step,wall_seconds. Kept apart so the other two files are
/// reproducible byte for byte.
void write_timing(const std::string& path, const TrainHistory& history);

std::vector<double> read_loss_history(const std::string& path);
std::vector<Snapshot> read_snapshots(const std::string& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace sigcwgan
