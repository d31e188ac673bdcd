#include "sigcwgan/datasets.hpp"

#include "sigcwgan/checkpoint.hpp"
#include "sigcwgan/errors.hpp"
#include "sigcwgan/random.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sigcwgan {

void VarSpec::validate() const {
    if (dim < 1) throw DomainError("var1: dim must be >= 1");
    if (!(std::abs(phi) <= 1.0)) throw DomainError("var1: |phi| must be <= 1");
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw DomainError("var1: sigma must lie in [0, 1]");
    if (length < 1) throw DomainError("var1: length must be >= 1");
}

ArchSpec ArchSpec::with_order(std::size_t order) {
    ArchSpec spec;
    spec.order = order;
    spec.alphas.assign(order, order > 0 ? 0.6 / static_cast<double>(order) : 0.0);
    return spec;
}

void ArchSpec::validate() const {
    if (order < 1) throw DomainError("arch: order must be >= 1");
    if (alphas.size() != order) throw DomainError("arch: need exactly `order` coefficients");
    if (!(alpha0 > 0.0)) throw DomainError("arch: alpha0 must be positive");
    double total = 0.0;
    for (double a : alphas) {
        if (!(a >= 0.0)) throw DomainError("arch: coefficients must be non-negative");
        total += a;
    }
    if (!(total < 1.0)) throw DomainError("arch: coefficients must sum to less than 1");
    if (length < 1) throw DomainError("arch: length must be >= 1");
}

TimeSeries var1_simulate(const VarSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto d = static_cast<Eigen::Index>(spec.dim);
    const double common = std::sqrt(spec.sigma);
    const double idio = std::sqrt(1.0 - spec.sigma);
    auto noise = [&] {
        const double shared = rng.normal();
        Eigen::RowVectorXd eps(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            eps(i) = common * shared + idio * rng.normal();
        }
        return eps;
    };

    Eigen::MatrixXd x(static_cast<Eigen::Index>(spec.length), d);
    if (std::abs(spec.phi) < 1.0) {
        x.row(0) = noise() / std::sqrt(1.0 - spec.phi * spec.phi);
    } else {
        x.row(0).setZero();
    }
    for (Eigen::Index t = 1; t < x.rows(); ++t) {
        x.row(t) = spec.phi * x.row(t - 1) + noise();
    }
    return TimeSeries(std::move(x));
}

TimeSeries arch_simulate(const ArchSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t total = spec.length + kArchBurnIn;
    std::vector<double> x(total + spec.order, 0.0);  // first `order` entries are pre-sample zeros
    for (std::size_t t = spec.order; t < x.size(); ++t) {
        double variance = spec.alpha0;
        for (std::size_t i = 1; i <= spec.order; ++i) {
            variance += spec.alphas[i - 1] * x[t - i] * x[t - i];
        }
        x[t] = std::sqrt(variance) * rng.normal();
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(spec.length), 1);
    for (std::size_t t = 0; t < spec.length; ++t) {
        values(static_cast<Eigen::Index>(t), 0) = x[spec.order + kArchBurnIn + t];
    }
    return TimeSeries(std::move(values));
}

IngestMode parse_ingest_mode(const std::string& text) {
    if (text == "log_return") return IngestMode::LogReturn;
    if (text == "log") return IngestMode::Log;
    if (text == "raw") return IngestMode::Raw;
    throw DomainError("unknown ingest mode '" + text + "' (log_return, log, raw)");
}

std::string to_string(IngestMode mode) {
    switch (mode) {
        case IngestMode::LogReturn: return "log_return";
        case IngestMode::Log: return "log";
        case IngestMode::Raw: return "raw";
    }
    return "raw";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool parse_number(const std::string& text, double& out) {
    std::size_t begin = text.find_first_not_of(" \t");
    std::size_t end = text.find_last_not_of(" \t");
    if (begin == std::string::npos) return false;
    const char* first = text.data() + begin;
    const char* last = text.data() + end + 1;
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace

IngestResult ingest_csv(const std::string& path, const std::vector<CsvColumn>& columns) {
    if (columns.empty()) {
        throw DomainError("ingest_csv: no columns requested");
    }
    std::ifstream in(path);
    if (!in) {
        throw DomainError("ingest_csv: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DomainError("ingest_csv: " + path + " has no header row");
    }
    const auto header = split_csv_line(line);
    std::vector<std::size_t> index;
    for (const auto& c : columns) {
        std::size_t found = header.size();
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == c.name) found = i;
        }
        if (found == header.size()) {
            throw DomainError("ingest_csv: column '" + c.name + "' not in " + path);
        }
        index.push_back(found);
    }

    IngestResult result;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        std::vector<double> row(columns.size());
        bool ok = true;
        for (std::size_t k = 0; k < columns.size() && ok; ++k) {
            ok = index[k] < fields.size() && parse_number(fields[index[k]], row[k]);
        }
        if (ok) {
            rows.push_back(std::move(row));
        } else {
            ++result.dropped_rows;
        }
    }

    bool any_return = false;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k].mode == IngestMode::Raw) continue;
        any_return = any_return || columns[k].mode == IngestMode::LogReturn;
        for (const auto& row : rows) {
            if (!(row[k] > 0.0)) {
                throw DomainError("ingest_csv: column '" + columns[k].name +
                                  "' has a non-positive value under a logarithm");
            }
        }
    }
    const std::size_t first = any_return ? 1 : 0;
    if (rows.size() <= first) {
        throw DomainError("ingest_csv: no usable rows in " + path);
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size() - first),
                           static_cast<Eigen::Index>(columns.size()));
    for (std::size_t t = first; t < rows.size(); ++t) {
        for (std::size_t k = 0; k < columns.size(); ++k) {
            double v = rows[t][k];
            switch (columns[k].mode) {
                case IngestMode::LogReturn: v = std::log(rows[t][k] / rows[t - 1][k]); break;
                case IngestMode::Log: v = std::log(v); break;
                case IngestMode::Raw: break;
            }
            values(static_cast<Eigen::Index>(t - first), static_cast<Eigen::Index>(k)) = v;
        }
    }
    result.series = TimeSeries(std::move(values));
    return result;
}

void write_series_csv(const std::string& path, const TimeSeries& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << 't';
    for (std::size_t i = 0; i < series.dim(); ++i) out << ",x" << i;
    out << '\n';
    for (std::size_t t = 0; t < series.length(); ++t) {
        out << format_double(series.time_at(t));
        for (std::size_t i = 0; i < series.dim(); ++i) {
            out << ',' << format_double(series.values(static_cast<Eigen::Index>(t),
                                                      static_cast<Eigen::Index>(i)));
        }
        out << '\n';
    }
}

TimeSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot open series " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw CorruptFileError(path + ": missing header");
    }
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t") {
        throw CorruptFileError(path + ": header must be t,x0,...");
    }
    const std::size_t d = header.size() - 1;
    std::vector<double> flat;
    std::vector<double> time;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != d + 1) {
            throw CorruptFileError(path + ": row with " + std::to_string(fields.size()) +
                                   " fields, expected " + std::to_string(d + 1));
        }
        double v = 0.0;
        if (!parse_number(fields[0], v)) throw CorruptFileError(path + ": bad time stamp");
        time.push_back(v);
        for (std::size_t i = 1; i <= d; ++i) {
            if (!parse_number(fields[i], v)) throw CorruptFileError(path + ": bad value");
            flat.push_back(v);
        }
    }
    if (time.empty()) {
        throw CorruptFileError(path + ": no rows");
    }
    const auto rows = static_cast<Eigen::Index>(time.size());
    TimeSeries series(Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(flat.data(), rows,
                                                                 static_cast<Eigen::Index>(d)));
    bool regular = true;
    for (std::size_t t = 0; t < time.size() && regular; ++t) {
        regular = time[t] == static_cast<double>(t);
    }
    if (!regular) series.time = std::move(time);
    return series;
}

}  // namespace sigcwgan
