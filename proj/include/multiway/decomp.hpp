#pragma once

// CP (alternating least squares), Tucker (HOSVD / HOOI) and tensor-train (TT-SVD)
// decompositions of dense tensors.

#include "multiway/dense_tensor.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace multiway {

/// Monitored error after every iteration (relative reconstruction error for
/// decompositions, training objective for fits).
struct FitReport {
    std::vector<double> errors;
    std::size_t iterations = 0;
    bool converged = false;

    double final_error() const { return errors.empty() ? 0.0 : errors.back(); }
};

/// sum_r weights[r] * a_r^(1) o ... o a_r^(N); factor columns have unit 2-norm,
/// weights are nonnegative and nonincreasing.
struct CpModel {
    Vector weights;
    std::vector<Matrix> factors;

    Index rank() const noexcept { return static_cast<Index>(weights.size()); }
    Shape shape() const;
    void validate() const;
    /// The diagonal-core view: an R x ... x R tensor with weights on the superdiagonal.
    Tensor diagonal_core() const;
};

struct TuckerModel {
    Tensor core;
    std::vector<Matrix> factors;  // I_n x R_n, orthonormal columns

    std::vector<Index> ranks() const { return core.shape().dims(); }
    Shape shape() const;
    void validate() const;
};

/// Chain of 3-way cores R_{n-1} x I_n x R_n with R_0 = R_N = 1.
struct TtModel {
    std::vector<Tensor> cores;

    std::vector<Index> ranks() const;  // R_0..R_N
    Shape shape() const;
    void validate() const;
};

enum class CpInit { Random, Hosvd };

struct CpOptions {
    std::size_t max_iters = 500;
    double tol = 1e-8;  // stop when the relative error decreases by less than this
    std::uint64_t seed = 42;
    std::size_t restarts = 3;
    CpInit init = CpInit::Random;
    double ridge = 0.0;  // optional Tikhonov term on the ALS subproblems
};

struct CpFit {
    CpModel model;
    FitReport report;
};

CpFit cp_als(const Tensor& t, Index rank, const CpOptions& opts = {});
Tensor cp_reconstruct(const CpModel& m);

/// Rescales to unit columns, nonnegative weights sorted descending, and fixes column signs.
void canonicalize(CpModel& m);

struct TuckerOptions {
    std::size_t max_iters = 500;
    double tol = 1e-8;
};

struct TuckerFit {
    TuckerModel model;
    FitReport report;
};

TuckerModel hosvd(const Tensor& t, const std::vector<Index>& ranks);
/// Alternating refinement started from hosvd(); never returns a worse fit than hosvd().
TuckerFit hooi(const Tensor& t, const std::vector<Index>& ranks, const TuckerOptions& opts = {});
Tensor tucker_reconstruct(const TuckerModel& m);

struct TtOptions {
    /// Interior rank caps R_1..R_{N-1}; a single value applies to all, empty means unrestricted.
    std::vector<Index> max_ranks;
    /// Relative accuracy: ||t - reconstruction|| <= tol * ||t|| when tol > 0.
    double tol = 0.0;
};

struct TtFit {
    TtModel model;
    FitReport report;
    std::vector<double> discarded;  // singular mass dropped at each of the N-1 steps
};

TtFit tt_svd(const Tensor& t, const TtOptions& opts = {});
Tensor tt_reconstruct(const TtModel& m);

/// ||t - approx|| / ||t||.
double relative_error(const Tensor& t, const Tensor& approx);

struct RankSweepPoint {
    Index rank;
    double error;
};

std::vector<RankSweepPoint> rank_sweep(const Tensor& t, const std::vector<Index>& ranks, const CpOptions& opts = {});

namespace detail {

/// prod over modes k != skip (descending, the lowest mode varies fastest) of the Khatri-Rao product.
Matrix khatri_rao_except(const std::vector<Matrix>& factors, std::size_t skip);

/// Factor initialization shared by every CP-style solver so runs with equal seeds agree.
std::vector<Matrix> cp_initial_factors(const Shape& shape, Index rank, const CpOptions& opts, std::size_t restart,
                                       const std::vector<Matrix>* unfoldings);

/// Normalizes factor columns into weights; zero columns become e_1 with weight 0.
Vector normalize_columns(Matrix& a);

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng);

}  // namespace detail

}  // namespace multiway
