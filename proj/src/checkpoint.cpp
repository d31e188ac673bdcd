#include "sigcwgan/checkpoint.hpp"

#include "sigcwgan/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace sigcwgan {

namespace {

constexpr const char* kFormat = "sigcwgan-checkpoint";

nlohmann::json matrix_json(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                           const double* data) {
    return {{"name", name},
            {"shape", {rows, cols}},
            {"values", std::vector<double>(data, data + rows * cols)}};
}

void read_matrix(const nlohmann::json& j, const std::string& name, double* data,
                 Eigen::Index rows, Eigen::Index cols) {
    if (j.at("name").get<std::string>() != name) {
        throw CorruptFileError("checkpoint: expected tensor " + name + ", found " +
                               j.at("name").get<std::string>());
    }
    const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
    if (shape.size() != 2 || shape[0] != rows || shape[1] != cols) {
        throw CorruptFileError("checkpoint: tensor " + name + " has the wrong shape");
    }
    const auto values = j.at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
        throw CorruptFileError("checkpoint: tensor " + name + " has the wrong length");
    }
    std::copy(values.begin(), values.end(), data);
}

nlohmann::json generator_json(const ArfnnParams& params) {
    nlohmann::json tensors = nlohmann::json::array();
    for (int layer = 1; layer <= 4; ++layer) {
        const auto w = params.weight(layer);
        const auto b = params.bias(layer);
        tensors.push_back(matrix_json("W" + std::to_string(layer), w.rows(), w.cols(), w.data()));
        tensors.push_back(matrix_json("b" + std::to_string(layer), b.size(), 1, b.data()));
        if (layer <= 3) {
            const double slope = params.slope(layer);
            tensors.push_back(matrix_json("alpha" + std::to_string(layer), 1, 1, &slope));
        }
    }
    const auto& s = params.shape();
    return {{"dim", s.dim}, {"lags", s.lags}, {"hidden", s.hidden}, {"tensors", tensors}};
}

ArfnnParams generator_from_json(const nlohmann::json& j) {
    ArfnnShape shape{j.at("dim").get<std::size_t>(), j.at("lags").get<std::size_t>(),
                     j.at("hidden").get<std::size_t>()};
    ArfnnParams params(shape);
    const auto& tensors = j.at("tensors");
    if (!tensors.is_array() || tensors.size() != 11) {
        throw CorruptFileError("checkpoint: generator must hold 11 tensors");
    }
    std::size_t at = 0;
    for (int layer = 1; layer <= 4; ++layer) {
        auto w = params.weight(layer);
        auto b = params.bias(layer);
        read_matrix(tensors[at++], "W" + std::to_string(layer), w.data(), w.rows(), w.cols());
        read_matrix(tensors[at++], "b" + std::to_string(layer), b.data(), b.size(), 1);
        if (layer <= 3) {
            read_matrix(tensors[at++], "alpha" + std::to_string(layer), &params.slope(layer), 1, 1);
        }
    }
    return params;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    const auto& m = c.sig_map;
    nlohmann::json j = {
        {"format", kFormat},
        {"version", kCheckpointVersion},
        {"config", config_to_json(c.config)},
        {"seeds",
         {{"root", c.seeds.root},
          {"init", c.seeds.init},
          {"batches", c.seeds.batches},
          {"noise", c.seeds.noise},
          {"snapshots", c.seeds.snapshots},
          {"evaluation", c.seeds.evaluation}}},
        {"sig_map",
         {{"lambda", m.lambda},
          {"weights", matrix_json("weights", m.weights.rows(), m.weights.cols(), m.weights.data())},
          {"intercept", matrix_json("intercept", m.intercept.size(), 1, m.intercept.data())}}},
        {"generator", generator_json(c.params)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write checkpoint " + path);
    }
    out << j.dump() << '\n';
    if (!out) {
        throw std::runtime_error("failed writing checkpoint " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorruptFileError("cannot open checkpoint " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError("checkpoint " + path + " is not valid JSON: " + e.what());
    }
    try {
        if (!j.is_object() || j.value("format", std::string{}) != kFormat) {
            throw CorruptFileError("checkpoint " + path + " has no sigcwgan format tag");
        }
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw VersionError("checkpoint " + path + " has version " + std::to_string(version) +
                               ", expected " + std::to_string(kCheckpointVersion));
        }
        const auto& s = j.at("seeds");
        SeedLineage seeds{s.at("root").get<std::uint64_t>(), s.at("init").get<std::uint64_t>(),
                          s.at("batches").get<std::uint64_t>(), s.at("noise").get<std::uint64_t>(),
                          s.at("snapshots").get<std::uint64_t>(),
                          s.at("evaluation").get<std::uint64_t>()};

        const auto& jm = j.at("sig_map");
        const auto wshape = jm.at("weights").at("shape").get<std::vector<Eigen::Index>>();
        if (wshape.size() != 2) {
            throw CorruptFileError("checkpoint: malformed signature map shape");
        }
        LinearSigMap map;
        map.lambda = jm.at("lambda").get<double>();
        map.weights.resize(wshape[0], wshape[1]);
        map.intercept.resize(wshape[0]);
        read_matrix(jm.at("weights"), "weights", map.weights.data(), wshape[0], wshape[1]);
        read_matrix(jm.at("intercept"), "intercept", map.intercept.data(), wshape[0], 1);

        return Checkpoint{config_from_json(j.at("config")), seeds,
                          generator_from_json(j.at("generator")), std::move(map)};
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError("checkpoint " + path + " is malformed: " + e.what());
    } catch (const DomainError& e) {
        throw CorruptFileError("checkpoint " + path + " is malformed: " + e.what());
    }
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf.data(), end);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    return out;
}

std::vector<std::vector<double>> read_table(const std::string& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) {
        throw CorruptFileError("cannot open " + path);
    }
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                throw CorruptFileError(path + ": bad number '" + field + "'");
            }
            row.push_back(v);
        }
        if (row.size() != columns) {
            throw CorruptFileError(path + ": expected " + std::to_string(columns) + " columns");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void write_loss_history(const std::string& path, const TrainHistory& history) {
    auto out = open_out(path);
    out << "step,loss\n";
    for (std::size_t i = 0; i < history.losses.size(); ++i) {
        out << (i + 1) << ',' << format_double(history.losses[i]) << '\n';
    }
}

void write_snapshots(const std::string& path, const TrainHistory& history) {
    auto out = open_out(path);
    out << "step,sig_w1,acf,marginal\n";
    for (const auto& s : history.snapshots) {
        out << s.step << ',' << format_double(s.sig_w1) << ',' << format_double(s.acf) << ','
            << format_double(s.marginal) << '\n';
    }
}

void write_timing(const std::string& path, const TrainHistory& history) {
    auto out = open_out(path);
    out << "step,wall_seconds\n";
    for (std::size_t i = 0; i < history.snapshots.size() && i < history.wall_seconds.size(); ++i) {
        out << history.snapshots[i].step << ',' << format_double(history.wall_seconds[i]) << '\n';
    }
}

std::vector<double> read_loss_history(const std::string& path) {
    std::vector<double> losses;
    for (const auto& row : read_table(path, 2)) {
        losses.push_back(row[1]);
    }
    return losses;
}

std::vector<Snapshot> read_snapshots(const std::string& path) {
    std::vector<Snapshot> snapshots;
    for (const auto& row : read_table(path, 4)) {
        snapshots.push_back({static_cast<std::size_t>(row[0]), row[1], row[2], row[3]});
    }
    return snapshots;
}

}  // namespace sigcwgan
