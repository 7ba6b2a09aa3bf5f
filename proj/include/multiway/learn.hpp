#pragma once

// Tensor regression with CP- or Tucker-structured coefficients, masked CP
// completion and parameter counting.

#include "multiway/decomp.hpp"
#include "multiway/sparse_tensor.hpp"

#include <cstdint>
#include <vector>

namespace multiway {

/// One training case: tensor covariate x, vector covariates z, scalar response y.
struct RegressionSample {
    Tensor x;
    Vector z;
    double y = 0.0;
};

struct RegressionOptions {
    std::size_t max_iters = 500;
    double tol = 1e-10;  // relative objective decrease
    std::uint64_t seed = 42;
    std::size_t restarts = 1;
    bool intercept = true;  // prepend a constant 1 to every z
};

/// y = <X, sum_r b_r^(1) o ... o b_r^(N)> + w^T [1, z].
struct CpRegressionModel {
    std::vector<Matrix> factors;  // I_n x R
    Vector weights;               // covariate weights, intercept first when enabled
    bool intercept = true;
    double residual_scale = 0.0;  // RMS training residual

    Tensor coefficient() const;
};

/// y = <X, G x_1 B_1 ... x_N B_N> + w^T [1, z].
struct TuckerRegressionModel {
    Tensor core;
    std::vector<Matrix> factors;  // I_n x R_n
    Vector weights;
    bool intercept = true;
    double residual_scale = 0.0;

    Tensor coefficient() const;
};

struct CpRegressionFit {
    CpRegressionModel model;
    FitReport report;  // penalized mean squared training error per sweep
};

struct TuckerRegressionFit {
    TuckerRegressionModel model;
    FitReport report;
};

/// Alternating ridge regression over the factor matrices (and w); lambda >= 0.
CpRegressionFit cp_regression_fit(const std::vector<RegressionSample>& samples, Index rank, double lambda = 1e-6,
                                  const RegressionOptions& opts = {});

/// Alternating ridge regression over the core, each factor matrix (and w).
TuckerRegressionFit tucker_regression_fit(const std::vector<RegressionSample>& samples,
                                          const std::vector<Index>& ranks, double lambda = 1e-6,
                                          const RegressionOptions& opts = {});

double regress_predict(const CpRegressionModel& m, const Tensor& x, const Vector& z);
double regress_predict(const TuckerRegressionModel& m, const Tensor& x, const Vector& z);

enum class ParamModel { Cp, Tucker, Vectorized };
enum class ParamMode { Raw, Effective };

/// Number of free coefficients of a regression model on an I_1 x ... x I_N covariate
/// with c vector covariates.
///   vectorized: prod I_n + c
///   cp:         R sum I_n + c                     (effective: - R(N-1))
///   tucker:     sum I_n R_n + prod R_n + c        (effective: - sum R_n^2)
WideSize param_count(ParamModel kind, const std::vector<Index>& dims, const std::vector<Index>& ranks,
                     Index covariates, ParamMode mode);

/// {0,1} indicator tensor of observed cells.
class ObservationMask {
public:
    explicit ObservationMask(Sparse indicators);

    const Sparse& indicators() const noexcept { return indicators_; }
    const Shape& shape() const noexcept { return indicators_.shape(); }
    std::size_t observed_count() const noexcept { return indicators_.nnz(); }
    bool observed(WideSize offset) const { return indicators_.get_offset(offset) != 0.0; }

    static ObservationMask all(const Shape& shape);

private:
    Sparse indicators_;
};

/// Masked CP-ALS: each factor row is a least-squares fit to the observed cells of its slice.
/// The report tracks the relative error on observed cells.
CpFit cp_complete(const Sparse& observed, const ObservationMask& mask, Index rank, const CpOptions& opts = {});

/// Dense completion: unobserved cells from the model; observed cells as given unless pure_model.
Tensor fill_completed(const Sparse& observed, const ObservationMask& mask, const CpModel& model,
                      bool pure_model = false);

}  // namespace multiway
