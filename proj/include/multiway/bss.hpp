#pragma once

// Blind source separation harness: synthetic mixtures of sinusoidal / damped
// sources, separated by PCA, FastICA and CP decomposition of the Hankelized
// mixture tensor.

#include "multiway/decomp.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace multiway {

enum class SourceKind { Sinusoid, DampedExponential };

struct ScenarioSpec {
    Index sources = 2;
    Index channels = 3;
    Index samples = 400;
    std::vector<SourceKind> kinds;  // empty: all sinusoids
    std::vector<double> frequencies{0.3, 0.8};  // rad/sample
    double damping = 0.005;                     // decay rate of damped sources
    double noise = 0.0;                         // std of additive Gaussian noise on the mixtures
    std::uint64_t seed = 42;
};

struct BssScenario {
    Matrix sources;   // K x T, unit power
    Matrix mixing;    // C x K
    Matrix mixtures;  // C x T
    double noise = 0.0;
    std::uint64_t seed = 0;
};

BssScenario generate_scenario(const ScenarioSpec& spec);

struct BssResult {
    std::string method;
    Matrix estimated;       // K x T source estimates (arbitrary order, sign and scale)
    Matrix reconstruction;  // C x T model of the mixtures
    double residual = 0.0;  // ||X - X_hat|| / ||X||
    bool converged = true;
    bool reliable = true;
    std::string note;

    // filled by score()
    std::vector<double> correlations;  // per true source, best |rho| after alignment
    std::vector<Index> assignment;     // estimate row matched to each true source
    std::vector<double> signs;

    double mean_correlation() const;
};

struct FastIcaOptions {
    std::size_t max_iters = 200;
    double tol = 1e-8;
    std::uint64_t seed = 42;
};

struct MultiwayOptions {
    Index window = 0;  // Hankel window L; 0 means T / 2
    Index rank = 0;    // CP rank; 0 means 2K
    CpOptions cp{2000, 1e-12, 42, 3, CpInit::Random, 0.0};
};

BssResult bss_pca(const Matrix& x, Index sources);
BssResult bss_fastica(const Matrix& x, Index sources, const FastIcaOptions& opts = {});
BssResult bss_multiway(const Matrix& x, Index sources, const MultiwayOptions& opts = {});

struct Alignment {
    std::vector<Index> assignment;
    std::vector<double> correlations;
    std::vector<double> signs;
};

/// Best assignment over permutations of |Pearson correlation| between rows.
Alignment align_sources(const Matrix& truth, const Matrix& estimated);

/// |Pearson correlation| of two equally long series.
double abs_correlation(const Vector& a, const Vector& b);

void score(BssResult& result, const BssScenario& scenario);

struct Comparison {
    std::vector<BssResult> results;
    Index sources = 0;
};

/// Runs "pca", "fastica" and/or "multiway"; failures become rows with a note.
Comparison compare_methods(const BssScenario& scenario, const std::vector<std::string>& methods,
                           const MultiwayOptions& multiway = {}, const FastIcaOptions& ica = {});

/// method,residual,mean_abs_corr,corr_1..corr_K,converged,reliable,note
void write_comparison_csv(std::ostream& os, const Comparison& c);
/// time,original_k..,mixed_c..,<method>_estimate_k.. (estimates aligned in order, sign and scale)
void write_signals_csv(std::ostream& os, const BssScenario& scenario, const Comparison& c);

}  // namespace multiway
