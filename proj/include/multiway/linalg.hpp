#pragma once

#include "multiway/dense_tensor.hpp"

namespace multiway {

/// Thin SVD A = U diag(S) V^T with k = min(m, n) triplets, S nonincreasing.
/// Each U column has its largest-magnitude entry nonnegative.
struct SvdResult {
    Matrix U;
    Vector S;
    Matrix V;
};

/// One-sided Jacobi SVD.
SvdResult svd(const Matrix& a);

/// Keeps the r largest singular triplets, 1 <= r <= min(m, n).
SvdResult truncated_svd(const Matrix& a, Index r);

/// Singular values below this are treated as zero by pseudoinverse-based solvers.
double singular_value_cutoff(Index rows, Index cols, double sigma_max);

struct EigResult {
    Vector eigenvalues;   // nonincreasing
    Matrix eigenvectors;  // orthonormal columns, same sign convention as svd()
};

/// Symmetric eigendecomposition; rejects inputs that are not symmetric to 1e-10.
EigResult eigh_sym(const Matrix& s);

struct PcaResult {
    Matrix components;  // features x p, orthonormal
    Matrix projected;   // observations x p scores of the centered data
    Vector mean;        // per-feature mean removed before projection
    Vector variances;   // projected variances (n - 1 normalization), nonincreasing
};

/// PCA of observations-by-features data via the scatter matrix of the centered data.
/// Data are centered, not scaled.
PcaResult pca(const Matrix& x, Index p);

/// argmin_X ||aX - b||_F^2 + lambda ||X||_F^2. With lambda = 0 this is the
/// minimum-norm least-squares solution through the SVD pseudoinverse.
Matrix solve_ridge(const Matrix& a, const Matrix& b, double lambda);

/// Moore-Penrose pseudoinverse with the cutoff above.
Matrix pseudo_inverse(const Matrix& a);

/// Columns of a made orthonormal (Gram-Schmidt with reorthogonalization); zero
/// or dependent columns are replaced by an orthonormal completion.
Matrix orthonormalize(const Matrix& a);

}  // namespace multiway
