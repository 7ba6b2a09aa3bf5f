#include "multiway/decomp.hpp"

#include "multiway/linalg.hpp"
#include "multiway/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace multiway {

namespace detail {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = g(rng);
    return m;
}

Matrix khatri_rao_except(const std::vector<Matrix>& factors, std::size_t skip) {
    const Eigen::Index r = factors.front().cols();
    Matrix acc = Matrix::Ones(1, r);
    for (std::size_t k = factors.size(); k-- > 0;) {
        if (k == skip) continue;
        acc = khatri_rao(acc, factors[k]);
    }
    return acc;
}

Vector normalize_columns(Matrix& a) {
    Vector w(a.cols());
    for (Eigen::Index r = 0; r < a.cols(); ++r) {
        const double n = a.col(r).norm();
        w[r] = n;
        if (n > 0.0 && std::isfinite(n)) {
            a.col(r) /= n;
        } else {
            a.col(r) = Vector::Unit(a.rows(), 0);
            w[r] = 0.0;
        }
    }
    return w;
}

std::vector<Matrix> cp_initial_factors(const Shape& shape, Index rank, const CpOptions& opts, std::size_t restart,
                                       const std::vector<Matrix>* unfoldings) {
    auto rng = make_rng(opts.seed, restart);
    std::vector<Matrix> factors;
    for (std::size_t n = 0; n < shape.order(); ++n) {
        Matrix a = gaussian_matrix(shape[n], rank, rng);
        if (opts.init == CpInit::Hosvd && unfoldings != nullptr) {
            const SvdResult d = svd((*unfoldings)[n]);
            const Eigen::Index keep = std::min<Eigen::Index>(d.U.cols(), static_cast<Eigen::Index>(rank));
            a.leftCols(keep) = d.U.leftCols(keep);
        }
        normalize_columns(a);
        factors.push_back(std::move(a));
    }
    return factors;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// models

Shape CpModel::shape() const {
    std::vector<Index> dims;
    for (const auto& f : factors) dims.push_back(static_cast<Index>(f.rows()));
    return Shape(dims);
}

void CpModel::validate() const {
    if (factors.empty()) throw DimensionError("CP model has no factors");
    for (const auto& f : factors) {
        if (f.cols() != weights.size()) throw DimensionError("CP factor column count differs from rank");
        for (Eigen::Index r = 0; r < f.cols(); ++r)
            if (std::abs(f.col(r).norm() - 1.0) > 1e-10) throw DimensionError("CP factor column is not unit norm");
    }
    for (Eigen::Index r = 0; r < weights.size(); ++r) {
        if (weights[r] < 0.0) throw DimensionError("CP weight is negative");
        if (r > 0 && weights[r] > weights[r - 1]) throw DimensionError("CP weights are not sorted");
    }
}

Tensor CpModel::diagonal_core() const {
    std::vector<Index> dims(factors.size(), rank());
    Tensor core{Shape(dims)};
    std::vector<Index> idx(factors.size());
    for (Index r = 0; r < rank(); ++r) {
        std::fill(idx.begin(), idx.end(), r);
        core.at(idx) = weights[static_cast<Eigen::Index>(r)];
    }
    return core;
}

Shape TuckerModel::shape() const {
    std::vector<Index> dims;
    for (const auto& f : factors) dims.push_back(static_cast<Index>(f.rows()));
    return Shape(dims);
}

void TuckerModel::validate() const {
    if (factors.size() != core.order()) throw DimensionError("Tucker factor count differs from core order");
    for (std::size_t n = 0; n < factors.size(); ++n) {
        if (static_cast<Index>(factors[n].cols()) != core.dim(n))
            throw DimensionError("Tucker factor " + std::to_string(n + 1) + " does not match core extent");
        if (factors[n].cols() > factors[n].rows()) throw DimensionError("Tucker rank exceeds mode size");
    }
}

std::vector<Index> TtModel::ranks() const {
    std::vector<Index> r;
    if (cores.empty()) return r;
    r.push_back(cores.front().dim(0));
    for (const auto& c : cores) r.push_back(c.dim(2));
    return r;
}

Shape TtModel::shape() const {
    std::vector<Index> dims;
    for (const auto& c : cores) dims.push_back(c.dim(1));
    return Shape(dims);
}

void TtModel::validate() const {
    if (cores.empty()) throw DimensionError("TT model has no cores");
    for (std::size_t k = 0; k < cores.size(); ++k) {
        if (cores[k].order() != 3) throw DimensionError("TT core " + std::to_string(k + 1) + " is not 3-way");
        if (k > 0 && cores[k].dim(0) != cores[k - 1].dim(2))
            throw DimensionError("TT cores " + std::to_string(k) + " and " + std::to_string(k + 1) +
                                 " have inconsistent ranks");
    }
    if (cores.front().dim(0) != 1 || cores.back().dim(2) != 1) throw DimensionError("TT boundary ranks must be 1");
}

// ---------------------------------------------------------------------------
// CP

Tensor cp_reconstruct(const CpModel& m) {
    if (m.factors.empty()) throw DimensionError("CP model has no factors");
    const Matrix kr = detail::khatri_rao_except(m.factors, 0);
    const Matrix x1 = m.factors[0] * m.weights.asDiagonal() * kr.transpose();
    return fold(x1, 1, m.shape());
}

void canonicalize(CpModel& m) {
    const Eigen::Index R = m.weights.size();
    for (auto& f : m.factors) {
        const Vector w = detail::normalize_columns(f);
        m.weights = m.weights.cwiseProduct(w);
    }
    for (Eigen::Index r = 0; r < R; ++r) {
        if (m.weights[r] < 0.0) {
            m.weights[r] = -m.weights[r];
            m.factors.back().col(r) *= -1.0;
        }
        double sign = 1.0;
        for (std::size_t n = 0; n + 1 < m.factors.size(); ++n) {
            Eigen::Index imax = 0;
            m.factors[n].col(r).cwiseAbs().maxCoeff(&imax);
            if (m.factors[n](imax, r) < 0.0) {
                m.factors[n].col(r) *= -1.0;
                sign = -sign;
            }
        }
        m.factors.back().col(r) *= sign;
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(R));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return m.weights[a] > m.weights[b]; });
    Vector w(R);
    for (Eigen::Index k = 0; k < R; ++k) w[k] = m.weights[order[static_cast<std::size_t>(k)]];
    for (auto& f : m.factors) {
        Matrix g(f.rows(), R);
        for (Eigen::Index k = 0; k < R; ++k) g.col(k) = f.col(order[static_cast<std::size_t>(k)]);
        f = std::move(g);
    }
    m.weights = std::move(w);
}

CpFit cp_als(const Tensor& t, Index rank, const CpOptions& opts) {
    if (rank < 1) throw DimensionError("cp_als: rank must be >= 1");
    const double tnorm = frobenius_norm(t);
    if (!(tnorm > 0.0)) throw NumericalError("cp_als: input tensor is all zero");
    const std::size_t N = t.order();
    const auto R = static_cast<Eigen::Index>(rank);

    std::vector<Matrix> unfoldings;
    for (std::size_t n = 0; n < N; ++n) unfoldings.push_back(unfold(t, n + 1));

    CpFit best;
    double best_err = std::numeric_limits<double>::infinity();
    const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);
    for (std::size_t restart = 0; restart < restarts; ++restart) {
        CpModel m;
        m.factors = detail::cp_initial_factors(t.shape(), rank, opts, restart, &unfoldings);
        m.weights = Vector::Ones(R);
        std::vector<Matrix> grams;
        for (const auto& f : m.factors) grams.push_back(f.transpose() * f);

        FitReport report;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t it = 0; it < opts.max_iters; ++it) {
            for (std::size_t n = 0; n < N; ++n) {
                Matrix v = Matrix::Ones(R, R);
                for (std::size_t k = 0; k < N; ++k)
                    if (k != n) v = v.cwiseProduct(grams[k]);
                const Matrix mttkrp = unfoldings[n] * detail::khatri_rao_except(m.factors, n);
                Matrix a = solve_ridge(v, mttkrp.transpose(), opts.ridge).transpose();
                m.weights = detail::normalize_columns(a);
                m.factors[n] = std::move(a);
                grams[n] = m.factors[n].transpose() * m.factors[n];
            }
            const double err = relative_error(t, cp_reconstruct(m));
            report.errors.push_back(err);
            report.iterations = it + 1;
            if (prev - err < opts.tol) {
                report.converged = true;
                break;
            }
            prev = err;
        }
        const double final_err = report.final_error();
        if (final_err < best_err) {
            best_err = final_err;
            best.model = std::move(m);
            best.report = std::move(report);
        }
    }
    canonicalize(best.model);
    return best;
}

double relative_error(const Tensor& t, const Tensor& approx) {
    t.require_same_shape(approx);
    const double n = frobenius_norm(t);
    if (!(n > 0.0)) throw NumericalError("relative_error: reference tensor has zero norm");
    return (t.vec() - approx.vec()).norm() / n;
}

std::vector<RankSweepPoint> rank_sweep(const Tensor& t, const std::vector<Index>& ranks, const CpOptions& opts) {
    std::vector<RankSweepPoint> out;
    for (Index r : ranks) {
        const CpFit fit = cp_als(t, r, opts);
        out.push_back({r, relative_error(t, cp_reconstruct(fit.model))});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tucker

namespace {

void check_tucker_ranks(const Tensor& t, const std::vector<Index>& ranks) {
    if (ranks.size() != t.order())
        throw DimensionError("Tucker rank vector has " + std::to_string(ranks.size()) + " entries, tensor has " +
                             std::to_string(t.order()) + " modes");
    for (std::size_t n = 0; n < ranks.size(); ++n)
        if (ranks[n] < 1 || ranks[n] > t.dim(n))
            throw DimensionError("Tucker rank " + std::to_string(ranks[n]) + " out of range 1.." +
                                 std::to_string(t.dim(n)) + " for mode " + std::to_string(n + 1));
}

// Leading r left singular vectors, completed to r orthonormal columns if the matrix is short of rank.
Matrix leading_left_vectors(const Matrix& a, Index r) {
    const SvdResult d = svd(a);
    const auto rr = static_cast<Eigen::Index>(r);
    if (d.U.cols() >= rr) return d.U.leftCols(rr);
    Matrix u = Matrix::Zero(a.rows(), rr);
    u.leftCols(d.U.cols()) = d.U;
    return orthonormalize(u);
}

Tensor project_all(const Tensor& t, const std::vector<Matrix>& factors, std::size_t skip) {
    Tensor y = t;
    for (std::size_t k = 0; k < factors.size(); ++k)
        if (k != skip) y = mode_n_product(y, factors[k].transpose(), k + 1);
    return y;
}

}  // namespace

TuckerModel hosvd(const Tensor& t, const std::vector<Index>& ranks) {
    check_tucker_ranks(t, ranks);
    TuckerModel m;
    for (std::size_t n = 0; n < t.order(); ++n) m.factors.push_back(leading_left_vectors(unfold(t, n + 1), ranks[n]));
    m.core = project_all(t, m.factors, t.order());
    return m;
}

Tensor tucker_reconstruct(const TuckerModel& m) {
    m.validate();
    Tensor y = m.core;
    for (std::size_t n = 0; n < m.factors.size(); ++n) y = mode_n_product(y, m.factors[n], n + 1);
    return y;
}

TuckerFit hooi(const Tensor& t, const std::vector<Index>& ranks, const TuckerOptions& opts) {
    TuckerFit fit;
    fit.model = hosvd(t, ranks);
    double best = relative_error(t, tucker_reconstruct(fit.model));
    TuckerModel cur = fit.model;
    double prev = best;
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        for (std::size_t n = 0; n < t.order(); ++n)
            cur.factors[n] = leading_left_vectors(unfold(project_all(t, cur.factors, n), n + 1), ranks[n]);
        cur.core = project_all(t, cur.factors, t.order());
        const double err = relative_error(t, tucker_reconstruct(cur));
        fit.report.errors.push_back(err);
        fit.report.iterations = it + 1;
        if (err < best) {
            best = err;
            fit.model = cur;
        }
        if (prev - err < opts.tol) {
            fit.report.converged = true;
            break;
        }
        prev = err;
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Tensor train

TtFit tt_svd(const Tensor& t, const TtOptions& opts) {
    const double tnorm = frobenius_norm(t);
    if (!(tnorm > 0.0)) throw NumericalError("tt_svd: input tensor is all zero");
    if (opts.tol < 0.0) throw DimensionError("tt_svd: tol must be >= 0");
    const std::size_t N = t.order();
    if (!opts.max_ranks.empty() && opts.max_ranks.size() != 1 && opts.max_ranks.size() != N - 1)
        throw DimensionError("tt_svd: max_ranks must have 1 or N-1 entries");
    auto cap = [&](std::size_t k) -> Index {
        if (opts.max_ranks.empty()) return std::numeric_limits<Index>::max();
        const Index c = opts.max_ranks.size() == 1 ? opts.max_ranks[0] : opts.max_ranks[k];
        if (c < 1) throw DimensionError("tt_svd: rank caps must be >= 1");
        return c;
    };
    const double delta = (opts.tol > 0.0 && N > 1) ? opts.tol * tnorm / std::sqrt(static_cast<double>(N - 1)) : 0.0;

    TtFit fit;
    Index r_prev = 1;
    RowMajorMatrixX<double> c = Eigen::Map<const RowMajorMatrixX<double>>(
        t.data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.size() / t.dim(0)));
    for (std::size_t k = 0; k + 1 < N; ++k) {
        const Index ik = t.dim(k);
        const SvdResult d = svd(Matrix(c));
        const auto full = static_cast<Index>(d.S.size());
        const double cutoff = singular_value_cutoff(static_cast<Index>(c.rows()), static_cast<Index>(c.cols()), d.S[0]);
        Index r = 0;
        while (r < full && d.S[static_cast<Eigen::Index>(r)] > cutoff) ++r;
        if (delta > 0.0) {
            // smallest r whose tail mass fits the per-step budget
            double tail = 0.0;
            Index rr = full;
            while (rr > 1) {
                const double s = d.S[static_cast<Eigen::Index>(rr - 1)];
                if (tail + s * s > delta * delta) break;
                tail += s * s;
                --rr;
            }
            r = std::min(r, rr);
        }
        r = std::max<Index>(1, std::min(r, cap(k)));
        double dropped = 0.0;
        for (Index j = r; j < full; ++j) dropped += d.S[static_cast<Eigen::Index>(j)] * d.S[static_cast<Eigen::Index>(j)];
        fit.discarded.push_back(std::sqrt(dropped));

        const auto re = static_cast<Eigen::Index>(r);
        Tensor core(Shape{r_prev, ik, r});
        Eigen::Map<RowMajorMatrixX<double>>(core.data(), static_cast<Eigen::Index>(r_prev * ik), re) = d.U.leftCols(re);
        fit.model.cores.push_back(std::move(core));

        const RowMajorMatrixX<double> next = d.S.head(re).asDiagonal() * d.V.leftCols(re).transpose();
        const Index next_dim = t.dim(k + 1);
        const auto rows = static_cast<Eigen::Index>(r * next_dim);
        c = Eigen::Map<const RowMajorMatrixX<double>>(next.data(), rows, next.size() / rows);
        r_prev = r;
    }
    Tensor last(Shape{r_prev, t.dim(N - 1), 1});
    std::copy(c.data(), c.data() + c.size(), last.data());
    fit.model.cores.push_back(std::move(last));

    fit.report.errors.push_back(relative_error(t, tt_reconstruct(fit.model)));
    fit.report.iterations = 1;
    fit.report.converged = true;
    return fit;
}

Tensor tt_reconstruct(const TtModel& m) {
    m.validate();
    // acc: (I_1 ... I_k) x R_k, row-major
    RowMajorMatrixX<double> acc = Eigen::Map<const RowMajorMatrixX<double>>(
        m.cores[0].data(), static_cast<Eigen::Index>(m.cores[0].dim(1)), static_cast<Eigen::Index>(m.cores[0].dim(2)));
    for (std::size_t k = 1; k < m.cores.size(); ++k) {
        const Tensor& g = m.cores[k];
        const auto rk = static_cast<Eigen::Index>(g.dim(0));
        const auto ik = static_cast<Eigen::Index>(g.dim(1));
        const auto rn = static_cast<Eigen::Index>(g.dim(2));
        const Eigen::Map<const RowMajorMatrixX<double>> gm(g.data(), rk, ik * rn);
        const RowMajorMatrixX<double> prod = acc * gm;
        acc = Eigen::Map<const RowMajorMatrixX<double>>(prod.data(), prod.rows() * ik, rn);
    }
    return Tensor(m.shape(), Eigen::Map<const Vector>(acc.data(), acc.size()));
}

}  // namespace multiway
