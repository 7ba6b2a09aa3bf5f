#include "multiway/learn.hpp"

#include "multiway/io.hpp"
#include "multiway/linalg.hpp"
#include "multiway/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace multiway {

namespace {

struct Design {
    Shape shape;
    Matrix covariates;  // K x c
    Vector y;
};

Design prepare(const std::vector<RegressionSample>& samples, bool intercept) {
    if (samples.empty()) throw DimensionError("regression: no samples");
    const Shape& shape = samples.front().x.shape();
    const Eigen::Index zc = samples.front().z.size();
    const Eigen::Index c = zc + (intercept ? 1 : 0);
    Design d{shape, Matrix(static_cast<Eigen::Index>(samples.size()), c), Vector(static_cast<Eigen::Index>(samples.size()))};
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        if (!(s.x.shape() == shape))
            throw DimensionError("regression: sample " + std::to_string(k) + " has shape " + s.x.shape().str() +
                                 ", expected " + shape.str());
        if (s.z.size() != zc)
            throw DimensionError("regression: sample " + std::to_string(k) + " has " + std::to_string(s.z.size()) +
                                 " covariates, expected " + std::to_string(zc));
        const auto kk = static_cast<Eigen::Index>(k);
        if (intercept) d.covariates(kk, 0) = 1.0;
        if (zc > 0) d.covariates.block(kk, intercept ? 1 : 0, 1, zc) = s.z.transpose();
        d.y[kk] = s.y;
    }
    return d;
}

Vector augment(const Vector& z, bool intercept) {
    if (!intercept) return z;
    Vector a(z.size() + 1);
    a[0] = 1.0;
    a.tail(z.size()) = z;
    return a;
}

double penalized_objective(const Vector& residual, double lambda, double penalty_sq) {
    return (residual.squaredNorm() + lambda * penalty_sq) / static_cast<double>(residual.size());
}

bool should_stop(double prev, double cur, double tol) {
    if (!std::isfinite(prev)) return false;
    return prev - cur <= tol * std::max(prev, std::numeric_limits<double>::min());
}

// Equalizes column norms across factors without changing their products.
void balance(std::vector<Matrix>& factors) {
    const auto N = static_cast<double>(factors.size());
    for (Eigen::Index r = 0; r < factors.front().cols(); ++r) {
        double log_sum = 0.0;
        bool positive = true;
        for (const auto& f : factors) {
            const double n = f.col(r).norm();
            if (!(n > 0.0)) positive = false;
            else log_sum += std::log(n);
        }
        if (!positive) continue;
        const double target = std::exp(log_sum / N);
        for (auto& f : factors) f.col(r) *= target / f.col(r).norm();
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// CP regression

Tensor CpRegressionModel::coefficient() const {
    CpModel m;
    m.factors = factors;
    m.weights = Vector::Ones(factors.front().cols());
    return cp_reconstruct(m);
}

double regress_predict(const CpRegressionModel& m, const Tensor& x, const Vector& z) {
    const Tensor b = m.coefficient();
    if (!(x.shape() == b.shape())) throw DimensionError("regress_predict: covariate shape " + x.shape().str() +
                                                        " does not match model shape " + b.shape().str());
    const Vector za = augment(z, m.intercept);
    if (za.size() != m.weights.size()) throw DimensionError("regress_predict: covariate vector length mismatch");
    return inner_product(x, b) + m.weights.dot(za);
}

CpRegressionFit cp_regression_fit(const std::vector<RegressionSample>& samples, Index rank, double lambda,
                                  const RegressionOptions& opts) {
    if (rank < 1) throw DimensionError("cp_regression_fit: rank must be >= 1");
    if (lambda < 0.0) throw DimensionError("cp_regression_fit: lambda must be >= 0");
    const Design d = prepare(samples, opts.intercept);
    const std::size_t N = d.shape.order();
    const auto R = static_cast<Eigen::Index>(rank);
    const Eigen::Index K = d.y.size(), c = d.covariates.cols();

    std::vector<std::vector<Matrix>> unfolded(N);
    for (std::size_t n = 0; n < N; ++n)
        for (const auto& s : samples) unfolded[n].push_back(unfold(s.x, n + 1));

    CpRegressionFit best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t restart = 0; restart < std::max<std::size_t>(1, opts.restarts); ++restart) {
        auto rng = detail::make_rng(opts.seed, restart);
        std::vector<Matrix> factors;
        for (std::size_t n = 0; n < N; ++n) factors.push_back(detail::gaussian_matrix(d.shape[n], rank, rng));
        Vector w = Vector::Zero(c);
        FitReport report;
        double prev = std::numeric_limits<double>::infinity();
        Vector residual = d.y;
        for (std::size_t it = 0; it < opts.max_iters; ++it) {
            for (std::size_t n = 0; n < N; ++n) {
                const auto In = static_cast<Eigen::Index>(d.shape[n]);
                const Matrix kr = detail::khatri_rao_except(factors, n);
                Matrix design(K, In * R + c);
                for (Eigen::Index k = 0; k < K; ++k) {
                    const Matrix p = unfolded[n][static_cast<std::size_t>(k)] * kr;  // In x R
                    design.row(k).head(In * R) = Eigen::Map<const Vector>(p.data(), In * R).transpose();
                }
                design.rightCols(c) = d.covariates;
                const Vector sol = solve_ridge(design, d.y, lambda);
                factors[n] = Eigen::Map<const Matrix>(sol.data(), In, R);
                w = sol.tail(c);
            }
            balance(factors);
            CpRegressionModel m{factors, w, opts.intercept, 0.0};
            const Tensor b = m.coefficient();
            for (Eigen::Index k = 0; k < K; ++k)
                residual[k] = d.y[k] - inner_product(samples[static_cast<std::size_t>(k)].x, b) - d.covariates.row(k).dot(w);
            double penalty = w.squaredNorm();
            for (const auto& f : factors) penalty += f.squaredNorm();
            const double obj = penalized_objective(residual, lambda, penalty);
            report.errors.push_back(obj);
            report.iterations = it + 1;
            if (should_stop(prev, obj, opts.tol)) {
                report.converged = true;
                break;
            }
            prev = obj;
        }
        if (report.final_error() < best_obj) {
            best_obj = report.final_error();
            best.model = CpRegressionModel{factors, w, opts.intercept, std::sqrt(residual.squaredNorm() / static_cast<double>(K))};
            best.report = std::move(report);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Tucker regression

Tensor TuckerRegressionModel::coefficient() const {
    Tensor b = core;
    for (std::size_t n = 0; n < factors.size(); ++n) b = mode_n_product(b, factors[n], n + 1);
    return b;
}

double regress_predict(const TuckerRegressionModel& m, const Tensor& x, const Vector& z) {
    const Tensor b = m.coefficient();
    if (!(x.shape() == b.shape())) throw DimensionError("regress_predict: covariate shape " + x.shape().str() +
                                                        " does not match model shape " + b.shape().str());
    const Vector za = augment(z, m.intercept);
    if (za.size() != m.weights.size()) throw DimensionError("regress_predict: covariate vector length mismatch");
    return inner_product(x, b) + m.weights.dot(za);
}

TuckerRegressionFit tucker_regression_fit(const std::vector<RegressionSample>& samples,
                                          const std::vector<Index>& ranks, double lambda,
                                          const RegressionOptions& opts) {
    if (lambda < 0.0) throw DimensionError("tucker_regression_fit: lambda must be >= 0");
    const Design d = prepare(samples, opts.intercept);
    const std::size_t N = d.shape.order();
    if (ranks.size() != N) throw DimensionError("tucker_regression_fit: rank vector length differs from tensor order");
    for (std::size_t n = 0; n < N; ++n)
        if (ranks[n] < 1 || ranks[n] > d.shape[n])
            throw DimensionError("tucker_regression_fit: rank " + std::to_string(ranks[n]) + " out of range for mode " +
                                 std::to_string(n + 1));
    const Eigen::Index K = d.y.size(), c = d.covariates.cols();
    const Shape core_shape(ranks);
    const auto core_size = static_cast<Eigen::Index>(core_shape.size());

    std::vector<std::vector<Matrix>> unfolded(N);
    for (std::size_t n = 0; n < N; ++n)
        for (const auto& s : samples) unfolded[n].push_back(unfold(s.x, n + 1));

    TuckerRegressionFit best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t restart = 0; restart < std::max<std::size_t>(1, opts.restarts); ++restart) {
        auto rng = detail::make_rng(opts.seed, restart);
        TuckerRegressionModel m;
        m.intercept = opts.intercept;
        for (std::size_t n = 0; n < N; ++n) m.factors.push_back(orthonormalize(detail::gaussian_matrix(d.shape[n], ranks[n], rng)));
        m.core = Tensor(core_shape);
        m.weights = Vector::Zero(c);
        FitReport report;
        double prev = std::numeric_limits<double>::infinity();
        Vector residual = d.y;
        for (std::size_t it = 0; it < opts.max_iters; ++it) {
            {  // core
                Matrix design(K, core_size + c);
                for (Eigen::Index k = 0; k < K; ++k) {
                    Tensor p = samples[static_cast<std::size_t>(k)].x;
                    for (std::size_t n = 0; n < N; ++n) p = mode_n_product(p, m.factors[n].transpose(), n + 1);
                    design.row(k).head(core_size) = p.vec().transpose();
                }
                design.rightCols(c) = d.covariates;
                const Vector sol = solve_ridge(design, d.y, lambda);
                m.core = Tensor(core_shape, sol.head(core_size));
                m.weights = sol.tail(c);
            }
            for (std::size_t n = 0; n < N; ++n) {
                Tensor wt = m.core;
                for (std::size_t k = 0; k < N; ++k)
                    if (k != n) wt = mode_n_product(wt, m.factors[k], k + 1);
                const Matrix wn = unfold(wt, n + 1);  // R_n x prod_{k != n} I_k
                const auto In = static_cast<Eigen::Index>(d.shape[n]);
                const auto Rn = static_cast<Eigen::Index>(ranks[n]);
                Matrix design(K, In * Rn + c);
                for (Eigen::Index k = 0; k < K; ++k) {
                    const Matrix p = unfolded[n][static_cast<std::size_t>(k)] * wn.transpose();  // In x Rn
                    design.row(k).head(In * Rn) = Eigen::Map<const Vector>(p.data(), In * Rn).transpose();
                }
                design.rightCols(c) = d.covariates;
                const Vector sol = solve_ridge(design, d.y, lambda);
                m.factors[n] = Eigen::Map<const Matrix>(sol.data(), In, Rn);
                m.weights = sol.tail(c);
            }
            const Tensor b = m.coefficient();
            for (Eigen::Index k = 0; k < K; ++k)
                residual[k] = d.y[k] - inner_product(samples[static_cast<std::size_t>(k)].x, b) -
                              d.covariates.row(k).dot(m.weights);
            double penalty = m.weights.squaredNorm() + m.core.vec().squaredNorm();
            for (const auto& f : m.factors) penalty += f.squaredNorm();
            const double obj = penalized_objective(residual, lambda, penalty);
            report.errors.push_back(obj);
            report.iterations = it + 1;
            if (should_stop(prev, obj, opts.tol)) {
                report.converged = true;
                break;
            }
            prev = obj;
        }
        if (report.final_error() < best_obj) {
            best_obj = report.final_error();
            m.residual_scale = std::sqrt(residual.squaredNorm() / static_cast<double>(K));
            best.model = std::move(m);
            best.report = std::move(report);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// parameter counting

WideSize param_count(ParamModel kind, const std::vector<Index>& dims, const std::vector<Index>& ranks,
                     Index covariates, ParamMode mode) {
    if (dims.empty()) throw DimensionError("param_count: no dimensions");
    for (Index d : dims)
        if (d < 1) throw DimensionError("param_count: dimensions must be >= 1");
    const auto N = static_cast<WideSize>(dims.size());
    WideSize sum_dims = 0;
    for (Index d : dims) sum_dims += d;
    const auto c = static_cast<WideSize>(covariates);

    switch (kind) {
        case ParamModel::Vectorized: return Shape(dims).size() + c;
        case ParamModel::Cp: {
            if (ranks.size() != 1) throw DimensionError("param_count: CP takes a single rank");
            const auto R = static_cast<WideSize>(ranks[0]);
            if (R < 1) throw DimensionError("param_count: rank must be >= 1");
            WideSize count = R * sum_dims + c;
            if (mode == ParamMode::Effective) count -= R * (N - 1);
            return count;
        }
        case ParamModel::Tucker: {
            if (ranks.size() != dims.size())
                throw DimensionError("param_count: Tucker needs one rank per mode");
            WideSize factors = 0, core = 1, rotations = 0;
            for (std::size_t n = 0; n < dims.size(); ++n) {
                if (ranks[n] < 1 || ranks[n] > dims[n])
                    throw DimensionError("param_count: rank " + std::to_string(ranks[n]) + " exceeds dimension " +
                                         std::to_string(dims[n]) + " of mode " + std::to_string(n + 1));
                factors += static_cast<WideSize>(dims[n]) * ranks[n];
                core *= ranks[n];
                rotations += static_cast<WideSize>(ranks[n]) * ranks[n];
            }
            WideSize count = factors + core + c;
            if (mode == ParamMode::Effective) count -= rotations;
            return count;
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// completion

ObservationMask::ObservationMask(Sparse indicators) : indicators_(std::move(indicators)) {
    for (const auto& [off, v] : indicators_)
        if (v != 1.0)
            throw DataError("observation mask entry at " + join_indices(indicators_.index_of(off)) +
                            " is not 0 or 1");
    if (indicators_.nnz() == 0) throw DataError("observation mask has no observed entries");
}

ObservationMask ObservationMask::all(const Shape& shape) {
    Sparse s(shape);
    for (WideSize off = 0; off < shape.size(); ++off) s.set_offset(off, 1.0);
    return ObservationMask(std::move(s));
}

CpFit cp_complete(const Sparse& observed, const ObservationMask& mask, Index rank, const CpOptions& opts) {
    if (rank < 1) throw DimensionError("cp_complete: rank must be >= 1");
    const Shape& shape = observed.shape();
    if (!(mask.shape() == shape))
        throw DimensionError("cp_complete: mask shape " + mask.shape().str() + " differs from tensor shape " + shape.str());
    for (const auto& [off, v] : observed)
        if (!mask.observed(off))
            throw DataError("cp_complete: tensor has a value at unobserved cell " + join_indices(observed.index_of(off)));
    const std::size_t N = shape.order();
    const auto R = static_cast<Eigen::Index>(rank);

    // observed cells: coordinates and values
    std::vector<std::vector<Index>> coords;
    std::vector<double> values;
    for (const auto& [off, one] : mask.indicators()) {
        coords.push_back(shape.unravel(off));
        values.push_back(observed.get_offset(off));
    }
    double obs_norm = 0.0;
    for (double v : values) obs_norm += v * v;
    obs_norm = std::sqrt(obs_norm);
    if (!(obs_norm > 0.0)) throw NumericalError("cp_complete: all observed entries are zero");

    // per mode and slice, the observed cells it contains
    std::vector<std::vector<std::vector<std::size_t>>> slices(N);
    for (std::size_t n = 0; n < N; ++n) {
        slices[n].resize(shape[n]);
        for (std::size_t e = 0; e < coords.size(); ++e) slices[n][coords[e][n]].push_back(e);
        for (Index i = 0; i < shape[n]; ++i)
            if (slices[n][i].empty())
                throw DataError("cp_complete: mode " + std::to_string(n + 1) + " slice " + std::to_string(i) + " (0-based)" +
                                " has no observed entries");
    }

    std::vector<Matrix> unfoldings;
    if (opts.init == CpInit::Hosvd) {
        const Tensor filled = sparse_to_dense(observed);
        for (std::size_t n = 0; n < N; ++n) unfoldings.push_back(unfold(filled, n + 1));
    }

    auto observed_error = [&](const CpModel& m) {
        double acc = 0.0;
        for (std::size_t e = 0; e < coords.size(); ++e) {
            double pred = 0.0;
            for (Eigen::Index r = 0; r < R; ++r) {
                double p = m.weights[r];
                for (std::size_t k = 0; k < N; ++k) p *= m.factors[k](static_cast<Eigen::Index>(coords[e][k]), r);
                pred += p;
            }
            acc += (values[e] - pred) * (values[e] - pred);
        }
        return std::sqrt(acc) / obs_norm;
    };

    CpFit best;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t restart = 0; restart < std::max<std::size_t>(1, opts.restarts); ++restart) {
        CpModel m;
        m.factors = detail::cp_initial_factors(shape, rank, opts, restart, unfoldings.empty() ? nullptr : &unfoldings);
        m.weights = Vector::Ones(R);
        FitReport report;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t it = 0; it < opts.max_iters; ++it) {
            for (std::size_t n = 0; n < N; ++n) {
                Matrix a(static_cast<Eigen::Index>(shape[n]), R);
                for (Index i = 0; i < shape[n]; ++i) {
                    const auto& cells = slices[n][i];
                    Matrix rows(static_cast<Eigen::Index>(cells.size()), R);
                    Vector rhs(static_cast<Eigen::Index>(cells.size()));
                    for (std::size_t q = 0; q < cells.size(); ++q) {
                        const auto qq = static_cast<Eigen::Index>(q);
                        rows.row(qq).setOnes();
                        for (std::size_t k = 0; k < N; ++k)
                            if (k != n)
                                rows.row(qq) = rows.row(qq).cwiseProduct(
                                    m.factors[k].row(static_cast<Eigen::Index>(coords[cells[q]][k])));
                        rhs[qq] = values[cells[q]];
                    }
                    a.row(static_cast<Eigen::Index>(i)) = solve_ridge(rows, rhs, opts.ridge).transpose();
                }
                m.weights = detail::normalize_columns(a);
                m.factors[n] = std::move(a);
            }
            const double err = observed_error(m);
            report.errors.push_back(err);
            report.iterations = it + 1;
            if (prev - err < opts.tol) {
                report.converged = true;
                break;
            }
            prev = err;
        }
        if (report.final_error() < best_err) {
            best_err = report.final_error();
            best.model = std::move(m);
            best.report = std::move(report);
        }
    }
    canonicalize(best.model);
    return best;
}

Tensor fill_completed(const Sparse& observed, const ObservationMask& mask, const CpModel& model, bool pure_model) {
    Tensor out = cp_reconstruct(model);
    if (!(out.shape() == mask.shape())) throw DimensionError("fill_completed: model shape differs from mask shape");
    if (!pure_model)
        for (const auto& [off, one] : mask.indicators()) out[static_cast<Index>(off)] = observed.get_offset(off);
    return out;
}

}  // namespace multiway
