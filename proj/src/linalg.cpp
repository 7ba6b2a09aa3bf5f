#include "multiway/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace multiway {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweeps = 80;

// Flip column signs so the largest-magnitude entry of each column of u is nonnegative.
void fix_signs(Matrix& u, Matrix* v) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        Eigen::Index imax = 0;
        u.col(j).cwiseAbs().maxCoeff(&imax);
        if (u(imax, j) < 0) {
            u.col(j) = -u.col(j);
            if (v) v->col(j) = -v->col(j);
        }
    }
}

// Tall case (m >= n) of the one-sided Jacobi iteration.
SvdResult jacobi_tall(const Matrix& a) {
    const Eigen::Index m = a.rows(), n = a.cols();
    Matrix w = a;
    Matrix v = Matrix::Identity(n, n);
    const double tol = kEps * static_cast<double>(m);

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = w.col(p).squaredNorm();
                const double beta = w.col(q).squaredNorm();
                const double gamma = w.col(p).dot(w.col(q));
                if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index i = 0; i < m; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    Vector sigma(n);
    for (Eigen::Index j = 0; j < n; ++j) sigma[j] = w.col(j).norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return sigma[x] > sigma[y]; });

    SvdResult r;
    r.U.resize(m, n);
    r.S.resize(n);
    r.V.resize(n, n);
    const double smax = n > 0 ? sigma[order[0]] : 0.0;
    const double tiny = smax * kEps * static_cast<double>(std::max(m, n));
    bool needs_completion = false;
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto j = order[static_cast<std::size_t>(k)];
        r.S[k] = sigma[j];
        r.V.col(k) = v.col(j);
        if (sigma[j] > tiny && sigma[j] > 0.0) {
            r.U.col(k) = w.col(j) / sigma[j];
        } else {
            r.U.col(k).setZero();
            needs_completion = true;
        }
    }
    if (needs_completion) r.U = orthonormalize(r.U);
    return r;
}

}  // namespace

Matrix orthonormalize(const Matrix& a) {
    const Eigen::Index m = a.rows(), n = a.cols();
    Matrix q(m, n);
    Eigen::Index basis = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        auto project_out = [&](Vector& y) {
            for (int pass = 0; pass < 2; ++pass)
                for (Eigen::Index k = 0; k < j; ++k) y -= q.col(k).dot(y) * q.col(k);
        };
        Vector x = a.col(j);
        const double norm0 = x.norm();
        project_out(x);
        if (norm0 > 0.0 && x.norm() > 1e-8 * norm0) {
            q.col(j) = x / x.norm();
            continue;
        }
        for (;;) {
            if (basis >= m) throw NumericalError("orthonormalize: more columns than rows");
            x = Vector::Unit(m, basis++);
            project_out(x);
            if (x.norm() > 1e-8) break;
        }
        q.col(j) = x / x.norm();
    }
    return q;
}

SvdResult svd(const Matrix& a) {
    if (a.size() == 0) throw DimensionError("svd: empty matrix");
    SvdResult r;
    if (a.rows() >= a.cols()) {
        r = jacobi_tall(a);
        fix_signs(r.U, &r.V);
    } else {
        SvdResult t = jacobi_tall(a.transpose());
        r.U = std::move(t.V);
        r.V = std::move(t.U);
        r.S = std::move(t.S);
        fix_signs(r.U, &r.V);
    }
    return r;
}

SvdResult truncated_svd(const Matrix& a, Index r) {
    const Index k = static_cast<Index>(std::min(a.rows(), a.cols()));
    if (r < 1 || r > k)
        throw DimensionError("truncated_svd: rank " + std::to_string(r) + " out of range 1.." + std::to_string(k));
    SvdResult full = svd(a);
    const auto rr = static_cast<Eigen::Index>(r);
    return {full.U.leftCols(rr), full.S.head(rr), full.V.leftCols(rr)};
}

double singular_value_cutoff(Index rows, Index cols, double sigma_max) {
    return static_cast<double>(std::max(rows, cols)) * sigma_max * 1e-12;
}

EigResult eigh_sym(const Matrix& s) {
    if (s.rows() != s.cols()) throw DimensionError("eigh_sym: matrix is not square");
    if (s.size() == 0) throw DimensionError("eigh_sym: empty matrix");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw DimensionError("eigh_sym: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
    if (solver.info() != Eigen::Success) throw NumericalError("eigh_sym: eigensolver failed");
    EigResult r;
    r.eigenvalues = solver.eigenvalues().reverse();
    r.eigenvectors = solver.eigenvectors().rowwise().reverse();
    fix_signs(r.eigenvectors, nullptr);
    return r;
}

PcaResult pca(const Matrix& x, Index p) {
    if (x.rows() < 2) throw DimensionError("pca: at least 2 observations required");
    if (p < 1 || p > static_cast<Index>(x.cols()))
        throw DimensionError("pca: component count " + std::to_string(p) + " out of range 1.." +
                             std::to_string(x.cols()));
    PcaResult r;
    r.mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - r.mean.transpose();
    Matrix scatter = centered.transpose() * centered;
    scatter = 0.5 * (scatter + scatter.transpose());
    const EigResult eig = eigh_sym(scatter);
    const auto pp = static_cast<Eigen::Index>(p);
    r.components = eig.eigenvectors.leftCols(pp);
    r.projected = centered * r.components;
    r.variances = eig.eigenvalues.head(pp).cwiseMax(0.0) / static_cast<double>(x.rows() - 1);
    return r;
}

Matrix solve_ridge(const Matrix& a, const Matrix& b, double lambda) {
    if (a.rows() != b.rows())
        throw DimensionError("solve_ridge: a has " + std::to_string(a.rows()) + " rows, b has " +
                             std::to_string(b.rows()));
    if (lambda < 0.0 || !std::isfinite(lambda)) throw DimensionError("solve_ridge: lambda must be >= 0");
    if (a.size() == 0) return Matrix::Zero(a.cols(), b.cols());
    const SvdResult d = svd(a);
    const double cutoff =
        singular_value_cutoff(static_cast<Index>(a.rows()), static_cast<Index>(a.cols()), d.S.size() ? d.S[0] : 0.0);
    Vector f(d.S.size());
    for (Eigen::Index i = 0; i < d.S.size(); ++i) {
        const double s = d.S[i];
        if (lambda == 0.0)
            f[i] = (s > cutoff && s > 0.0) ? 1.0 / s : 0.0;
        else
            f[i] = s / (s * s + lambda);
    }
    return d.V * (f.asDiagonal() * (d.U.transpose() * b));
}

Matrix pseudo_inverse(const Matrix& a) { return solve_ridge(a, Matrix::Identity(a.rows(), a.rows()), 0.0); }

}  // namespace multiway
