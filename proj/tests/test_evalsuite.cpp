#include "sigcwgan/datasets.hpp"
#include "sigcwgan/errors.hpp"
#include "sigcwgan/evalsuite.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace sigcwgan {
namespace {

using testing::random_path;

std::vector<Path> random_windows(Rng& rng, std::size_t n, Eigen::Index q, Eigen::Index d,
                                 double shift = 0.0) {
    std::vector<Path> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(random_path(rng, q, d).array() + shift);
    }
    return out;
}

std::vector<Path> futures(const TimeSeries& x, std::size_t p, std::size_t q) {
    const auto w = make_windows(x, p, q);
    return futures_of(w);
}

TEST(Marginal, IdenticalIsZero) {
    Rng rng(1);
    const auto w = random_windows(rng, 100, 3, 2);
    EXPECT_EQ(marginal_metric(w, w), 0.0);
}

TEST(Marginal, DisjointSupportsGiveTwo) {
    const std::vector<Path> a{Path::Constant(3, 1, 0.0), Path::Constant(3, 1, 0.1)};
    const std::vector<Path> b{Path::Constant(3, 1, 5.0), Path::Constant(3, 1, 5.2)};
    EXPECT_DOUBLE_EQ(marginal_metric(a, b, 10), 2.0);
}

TEST(Marginal, DuplicationInvariant) {
    Rng rng(2);
    const auto a = random_windows(rng, 50, 2, 2);
    const auto b = random_windows(rng, 40, 2, 2, 0.3);
    auto a2 = a, b2 = b;
    a2.insert(a2.end(), a.begin(), a.end());
    b2.insert(b2.end(), b.begin(), b.end());
    EXPECT_NEAR(marginal_metric(a, b), marginal_metric(a2, b2), 1e-14);
}

TEST(Marginal, BoundedByTwo) {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto a = random_windows(rng, 10, 3, 2, rng.normal() * 5);
        const auto b = random_windows(rng, 10, 3, 2, rng.normal() * 5);
        const double m = marginal_metric(a, b, 1 + rng.below(60));
        EXPECT_GE(m, 0.0);
        EXPECT_LE(m, 2.0);
    }
}

TEST(Marginal, Errors) {
    const std::vector<Path> empty;
    const std::vector<Path> one{Path::Zero(2, 1)};
    const std::vector<Path> two_d{Path::Zero(2, 2)};
    EXPECT_THROW(marginal_metric(empty, one), DomainError);
    EXPECT_THROW(marginal_metric(one, two_d), ShapeError);
    EXPECT_THROW(marginal_metric(one, one, 0), DomainError);
}

TEST(Acf, ReplayIsZero) {
    const auto x = var1_simulate({2, 0.8, 0.5, 2000, 4});
    const auto w = futures(x, 3, 3);
    EXPECT_EQ(acf_metric(w, w), 0.0);
}

TEST(Acf, SameVarProcessIsClose) {
    const auto a = var1_simulate({1, 0.8, 0.8, 100000, 5});
    const auto b = var1_simulate({1, 0.8, 0.8, 100000, 6});
    // Whole-series estimator of the real side is close to phi.
    EXPECT_NEAR(series_lag1_autocorrelation(a)[0], 0.8, 0.01);
    EXPECT_LT(acf_metric(a, futures(b, 3, 3)), 0.02);
    EXPECT_LT(acf_metric(futures(a, 3, 3), futures(b, 3, 3)), 0.02);
}

TEST(Acf, WhiteNoiseNearZero) {
    const auto a = var1_simulate({1, 0.0, 0.0, 50000, 7});
    const auto b = var1_simulate({1, 0.0, 0.0, 50000, 8});
    const auto rows = acf_table(futures(a, 3, 3), futures(b, 3, 3));
    EXPECT_LT(std::abs(rows[1].real), 0.02);
    EXPECT_LT(std::abs(rows[1].synth), 0.02);
    EXPECT_LT(acf_metric(futures(a, 3, 3), futures(b, 3, 3)), 0.03);
}

TEST(Acf, ScaleInvariant) {
    Rng rng(9);
    const auto a = futures(var1_simulate({2, 0.5, 0.3, 3000, 10}), 2, 4);
    const auto b = futures(var1_simulate({2, 0.7, 0.3, 3000, 11}), 2, 4);
    std::vector<Path> a2, b2;
    for (const auto& w : a) a2.push_back((3.0 * w.array() - 2.0).matrix());
    for (const auto& w : b) b2.push_back((3.0 * w.array() - 2.0).matrix());
    EXPECT_NEAR(acf_metric(a, b), acf_metric(a2, b2), 1e-12);
    EXPECT_NEAR(cross_corr_metric(a, b), cross_corr_metric(a2, b2), 1e-12);
}

TEST(Acf, ZeroVarianceIsAnError) {
    const std::vector<Path> flat(5, Path::Constant(3, 1, 2.0));
    const std::vector<Path> ok{Path::Random(3, 1), Path::Random(3, 1)};
    EXPECT_THROW(acf_metric(ok, flat), DomainError);
}

TEST(PooledAutocovariance, HandComputed) {
    // Windows (1,2,3) and (2,0,4) at lag 1: pairs (1,2),(2,3),(2,0),(0,4).
    Path a(3, 1), b(3, 1);
    a << 1, 2, 3;
    b << 2, 0, 4;
    const std::vector<Path> w{a, b};
    const double mean_ab = (2 + 6 + 0 + 0) / 4.0;
    const double mean_a = (1 + 2 + 2 + 0) / 4.0;
    const double mean_b = (2 + 3 + 0 + 4) / 4.0;
    EXPECT_DOUBLE_EQ(pooled_autocovariance(w, 0, 1), mean_ab - mean_a * mean_b);
    EXPECT_THROW(pooled_autocovariance(w, 0, 3), DomainError);
}

TEST(CrossCorr, ReplayZeroAndOneDim) {
    const auto x = var1_simulate({3, 0.8, 0.8, 2000, 12});
    const auto w = futures(x, 3, 3);
    EXPECT_EQ(cross_corr_metric(w, w), 0.0);
    const auto y = var1_simulate({1, 0.8, 0.8, 500, 13});
    EXPECT_EQ(cross_corr_metric(futures(y, 2, 2), futures(y, 2, 2)), 0.0);
}

TEST(CrossCorr, PerfectlyCorrelatedFeatures) {
    const auto a = var1_simulate({2, 0.5, 1.0, 20000, 14});
    const auto corr = pooled_correlation(futures(a, 1, 1));
    EXPECT_NEAR(corr(0, 1), 1.0, 1e-12);
    const auto b = var1_simulate({2, 0.5, 1.0, 20000, 15});
    EXPECT_LT(cross_corr_metric(a, futures(b, 1, 1)), 1e-10);
}

TEST(CrossCorr, StationaryCorrelationEqualsSigma) {
    const auto a = var1_simulate({3, 0.8, 0.4, 100000, 16});
    const auto corr = pooled_correlation(futures(a, 1, 1));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i != j) {
                EXPECT_NEAR(corr(i, j), 0.4, 0.02);
            }
        }
    }
    const auto b = var1_simulate({3, 0.8, 0.4, 100000, 17});
    EXPECT_LT(cross_corr_metric(futures(a, 3, 3), futures(b, 3, 3)), 0.1);
}

TEST(CrossCorr, Symmetric) {
    const auto a = futures(var1_simulate({2, 0.5, 0.3, 1000, 18}), 2, 2);
    const auto b = futures(var1_simulate({2, 0.5, 0.6, 1000, 19}), 2, 2);
    EXPECT_EQ(cross_corr_metric(a, b), cross_corr_metric(b, a));
}

TEST(Tstr, ReplayGivesEqualScores) {
    const auto x = var1_simulate({1, 0.8, 0.8, 5000, 20});
    const auto r = tstr_r2(x, replay_sampler(), 3, default_pipeline(2));
    EXPECT_EQ(r.trtr, r.tstr);
    EXPECT_LE(r.trtr, 1.0);
}

TEST(Tstr, VarOneLevels) {
    // Next-step R^2 of a stationary AR(1) is phi^2.
    const auto high = var1_simulate({1, 0.8, 0.8, 50000, 21});
    EXPECT_NEAR(tstr_r2(high, replay_sampler(), 3, default_pipeline(2)).trtr, 0.64, 0.02);
    const auto low = var1_simulate({1, 0.2, 0.8, 50000, 22});
    EXPECT_NEAR(tstr_r2(low, replay_sampler(), 3, default_pipeline(2)).trtr, 0.04, 0.02);
}

TEST(Tstr, InsufficientData) {
    const auto x = var1_simulate({1, 0.8, 0.8, 8, 23});
    EXPECT_THROW(tstr_r2(x, replay_sampler(), 3, default_pipeline(2)), DomainError);
}

TEST(Report, ReplayIdentities) {
    const auto x = var1_simulate({2, 0.8, 0.8, 3000, 24});
    EvalConfig config;
    config.dataset = "var1";
    const auto report = full_report(x, replay_sampler(), config);
    EXPECT_EQ(report.marginal, 0.0);
    EXPECT_EQ(report.acf, 0.0);
    EXPECT_EQ(report.cross_corr, 0.0);
    EXPECT_EQ(report.sig_w1, 0.0);
    EXPECT_EQ(report.trtr_r2, report.tstr_r2);
    EXPECT_EQ(report.r2_relative_error, 0.0);
    EXPECT_EQ(report.marginal_per_dim.size(), 2u);
}

TEST(Report, JsonRoundTrip) {
    const auto x = var1_simulate({1, 0.5, 0.8, 2000, 25});
    EvalConfig config;
    config.dataset = "round trip";
    Rng rng(26);
    // A sampler that perturbs real futures, so every field is non-trivial.
    const WindowSampler noisy = [&rng](std::span<const Window> windows) {
        std::vector<Path> out;
        for (const auto& w : windows) out.push_back(w.future + 0.3 * random_path(rng, w.future.rows(), w.future.cols()));
        return out;
    };
    const auto report = full_report(x, noisy, config);
    EXPECT_GT(report.marginal, 0.0);
    EXPECT_EQ(report_from_json(report_to_json(report)), report);
    testing::TempDir dir("report");
    write_report(dir.file("r.json"), report);
    EXPECT_EQ(read_report(dir.file("r.json")), report);
}

TEST(Report, RejectsForeignFiles) {
    EXPECT_THROW(report_from_json({{"format", "something"}}), CorruptFileError);
    EXPECT_THROW(report_from_json({{"format", "sigcwgan-report"}, {"version", 99}}), VersionError);
    testing::TempDir dir("report_bad");
    EXPECT_THROW(read_report(dir.file("missing.json")), CorruptFileError);
}

TEST(Tables, HistogramIntegratesToOne) {
    Rng rng(27);
    const auto a = random_windows(rng, 200, 3, 2);
    const auto b = random_windows(rng, 150, 3, 2, 0.5);
    const auto rows = histogram_table(a, b, 20);
    ASSERT_EQ(rows.size(), 40u);
    for (std::size_t dim = 0; dim < 2; ++dim) {
        double real = 0.0, synth = 0.0;
        const double width = rows[dim * 20 + 1].centre - rows[dim * 20].centre;
        for (std::size_t b2 = 0; b2 < 20; ++b2) {
            real += rows[dim * 20 + b2].real_density * width;
            synth += rows[dim * 20 + b2].synth_density * width;
        }
        EXPECT_NEAR(real, 1.0, 1e-9);
        EXPECT_NEAR(synth, 1.0, 1e-9);
    }
}

TEST(Tables, AcfTableStartsAtOne) {
    Rng rng(28);
    const auto a = random_windows(rng, 100, 4, 1);
    const auto rows = acf_table(a, a);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_DOUBLE_EQ(rows[0].real, 1.0);
    EXPECT_EQ(rows[2].real, rows[2].synth);
}

}  // namespace
}  // namespace sigcwgan
