#include "multiway/bss.hpp"
#include "multiway/error.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace multiway;

TEST(Scenario, SingleSourceIdentityMixing) {
    ScenarioSpec s;
    s.sources = 1;
    s.channels = 1;
    s.frequencies = {0.4};
    const BssScenario sc = generate_scenario(s);
    EXPECT_EQ((sc.mixtures - sc.mixing(0, 0) * sc.sources).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(sc.sources.row(0).squaredNorm() / 400.0, 1.0, 1e-12);
}

TEST(Scenario, DefaultSourcesNearlyUncorrelatedAndDeterministic) {
    const BssScenario a = generate_scenario(ScenarioSpec{});
    const BssScenario b = generate_scenario(ScenarioSpec{});
    EXPECT_EQ(a.mixtures, b.mixtures);
    EXPECT_EQ(a.sources, b.sources);
    EXPECT_LT(abs_correlation(a.sources.row(0).transpose(), a.sources.row(1).transpose()), 0.05);
    EXPECT_EQ(a.mixing.rows(), 3);
    ScenarioSpec other;
    other.seed = 7;
    EXPECT_NE(generate_scenario(other).mixing, a.mixing);
}

TEST(Scenario, Validation) {
    ScenarioSpec s;
    s.channels = 1;
    EXPECT_THROW((void)generate_scenario(s), DimensionError);
    s = ScenarioSpec{};
    s.frequencies = {0.3, 0.3};
    EXPECT_THROW((void)generate_scenario(s), DimensionError);
    s.frequencies = {0.3};
    EXPECT_THROW((void)generate_scenario(s), DimensionError);
}

TEST(Pca, SingleChannel) {
    ScenarioSpec s;
    s.sources = 1;
    s.channels = 1;
    s.frequencies = {0.5};
    const BssScenario sc = generate_scenario(s);
    BssResult r = bss_pca(sc.mixtures, 1);
    score(r, sc);
    EXPECT_NEAR(r.correlations[0], 1.0, 1e-12);
}

TEST(Pca, FullBasisHasZeroResidual) {
    const BssScenario sc = generate_scenario(ScenarioSpec{});
    EXPECT_LT(bss_pca(sc.mixtures, 3).residual, 1e-10);
    EXPECT_THROW((void)bss_pca(sc.mixtures, 4), DimensionError);
}

TEST(FastIca, SeparatesHeavyTailedSources) {
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> e(1.0);
    std::bernoulli_distribution sgn(0.5);
    BssScenario sc;
    sc.sources.resize(2, 2000);
    for (Eigen::Index k = 0; k < 2; ++k)
        for (Eigen::Index t = 0; t < 2000; ++t) sc.sources(k, t) = (sgn(rng) ? 1.0 : -1.0) * e(rng);
    const double c = std::cos(0.6), s = std::sin(0.6);
    sc.mixing.resize(2, 2);
    sc.mixing << c, -s, s, c;
    sc.mixtures = sc.mixing * sc.sources;
    BssResult r = bss_fastica(sc.mixtures, 2);
    score(r, sc);
    EXPECT_TRUE(r.converged);
    EXPECT_TRUE(r.reliable);
    for (double v : r.correlations) EXPECT_GT(v, 0.95);
}

TEST(FastIca, GaussianSourcesFlaggedUnreliable) {
    std::mt19937_64 rng(4);
    BssScenario sc;
    sc.sources = testing_support::gaussian(2, 4000, rng);
    sc.mixing = testing_support::gaussian(3, 2, rng);
    sc.mixtures = sc.mixing * sc.sources;
    BssResult r = bss_fastica(sc.mixtures, 2);
    score(r, sc);
    EXPECT_FALSE(r.reliable);
    EXPECT_FALSE(r.note.empty());
    EXPECT_EQ(r.correlations.size(), 2u);
}

TEST(Multiway, SingleSinusoidSingleChannel) {
    ScenarioSpec s;
    s.sources = 1;
    s.channels = 1;
    s.frequencies = {0.45};
    s.samples = 200;
    const BssScenario sc = generate_scenario(s);
    BssResult r = bss_multiway(sc.mixtures, 1);
    score(r, sc);
    EXPECT_GT(r.correlations[0], 0.99);
}

TEST(Multiway, DefaultScenarioSeparates) {
    const BssScenario sc = generate_scenario(ScenarioSpec{});
    BssResult r = bss_multiway(sc.mixtures, 2);
    score(r, sc);
    for (double v : r.correlations) EXPECT_GT(v, 0.95);
    EXPECT_GE(r.residual, 0.0);
}

TEST(Multiway, DampedSources) {
    ScenarioSpec s;
    s.kinds = {SourceKind::DampedExponential, SourceKind::Sinusoid};
    s.frequencies = {0.25, 0.9};
    const BssScenario sc = generate_scenario(s);
    BssResult r = bss_multiway(sc.mixtures, 2);
    score(r, sc);
    for (double v : r.correlations) EXPECT_GT(v, 0.9);
}

TEST(Multiway, Validation) {
    const BssScenario sc = generate_scenario(ScenarioSpec{});
    MultiwayOptions o;
    o.window = 401;
    EXPECT_THROW((void)bss_multiway(sc.mixtures, 2, o), DimensionError);
    o.window = 0;
    o.rank = 1;
    EXPECT_THROW((void)bss_multiway(sc.mixtures, 2, o), DimensionError);
}

TEST(Alignment, InvariantToSignAndPermutation) {
    const BssScenario sc = generate_scenario(ScenarioSpec{});
    Matrix est(2, sc.sources.cols());
    est.row(0) = -2.0 * sc.sources.row(1);
    est.row(1) = 0.5 * sc.sources.row(0);
    const Alignment a = align_sources(sc.sources, est);
    EXPECT_EQ(a.assignment, (std::vector<Index>{1, 0}));
    EXPECT_NEAR(a.correlations[0], 1.0, 1e-12);
    EXPECT_NEAR(a.correlations[1], 1.0, 1e-12);
    EXPECT_EQ(a.signs[0], 1.0);
    EXPECT_EQ(a.signs[1], -1.0);
}

TEST(Compare, EmptyMethodListGivesHeaderOnly) {
    const BssScenario sc = generate_scenario(ScenarioSpec{});
    const Comparison c = compare_methods(sc, {}, {}, {});
    std::ostringstream os;
    write_comparison_csv(os, c);
    EXPECT_EQ(os.str(), "method,residual,mean_abs_corr,corr_1,corr_2,converged,reliable,note\n");
}

TEST(Compare, DefaultScenarioTable) {
    const BssScenario sc = generate_scenario(ScenarioSpec{});
    const Comparison c = compare_methods(sc, {"pca", "fastica", "multiway"}, {}, {});
    ASSERT_EQ(c.results.size(), 3u);
    for (const auto& r : c.results) {
        EXPECT_TRUE(std::isfinite(r.residual)) << r.method;
        ASSERT_EQ(r.correlations.size(), 2u);
        for (double v : r.correlations) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
    EXPECT_GE(c.results[2].mean_correlation(), c.results[0].mean_correlation());
    std::ostringstream table, signals;
    write_comparison_csv(table, c);
    write_signals_csv(signals, sc, c);
    std::string header;
    std::istringstream sig(signals.str());
    std::getline(sig, header);
    EXPECT_EQ(header,
              "time,original_1,original_2,mixed_1,mixed_2,mixed_3,pca_estimate_1,pca_estimate_2,fastica_estimate_1,"
              "fastica_estimate_2,multiway_estimate_1,multiway_estimate_2");
}

TEST(Compare, UnknownMethodRecordedAsFailedRow) {
    const BssScenario sc = generate_scenario(ScenarioSpec{});
    const Comparison c = compare_methods(sc, {"nmf"}, {}, {});
    ASSERT_EQ(c.results.size(), 1u);
    EXPECT_NE(c.results[0].note.find("failed"), std::string::npos);
}
