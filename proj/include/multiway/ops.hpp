#pragma once

// Multilinear-algebra primitives over DenseTensor / SparseTensor.
// Mode arguments are 1-based throughout (mode n of an N-way tensor, 1 <= n <= N).

#include "multiway/dense_tensor.hpp"
#include "multiway/sparse_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace multiway {

/// Default densification budget: 2 GiB.
inline constexpr WideSize kDefaultMemoryBudget = WideSize{2} << 30;

namespace detail {

inline std::size_t checked_mode(std::size_t mode, std::size_t order) {
    if (mode < 1 || mode > order)
        throw DimensionError("mode " + std::to_string(mode) + " out of range 1.." + std::to_string(order));
    return mode - 1;
}

// Column strides of the mode-n unfolding: lowest-numbered non-mode index fastest.
inline std::vector<WideSize> unfold_strides(const Shape& shape, std::size_t n) {
    std::vector<WideSize> stride(shape.order(), 0);
    WideSize s = 1;
    for (std::size_t k = 0; k < shape.order(); ++k) {
        if (k == n) continue;
        stride[k] = s;
        s *= shape[k];
    }
    return stride;
}

}  // namespace detail

/// Mode-n matricization: I_n rows, prod_{k != n} I_k columns.
template <typename Scalar>
MatrixX<Scalar> unfold(const DenseTensor<Scalar>& t, std::size_t mode) {
    const std::size_t n = detail::checked_mode(mode, t.order());
    const Shape& shape = t.shape();
    const auto stride = detail::unfold_strides(shape, n);
    const Index rows = shape[n];
    MatrixX<Scalar> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows));
    std::vector<Index> idx(t.order(), 0);
    for (Index lin = 0; lin < t.size(); ++lin) {
        WideSize col = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) col += idx[k] * stride[k];
        m(static_cast<Eigen::Index>(idx[n]), static_cast<Eigen::Index>(col)) = t[lin];
        shape.next(idx);
    }
    return m;
}

/// Inverse of unfold().
template <typename Derived>
DenseTensor<typename Derived::Scalar> fold(const Eigen::MatrixBase<Derived>& m, std::size_t mode,
                                            const Shape& shape) {
    using Scalar = typename Derived::Scalar;
    const std::size_t n = detail::checked_mode(mode, shape.order());
    const WideSize cols = shape.size() / shape[n];
    if (static_cast<WideSize>(m.rows()) != shape[n] || static_cast<WideSize>(m.cols()) != cols)
        throw DimensionError("fold: matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " inconsistent with mode " + std::to_string(mode) + " of shape " + shape.str());
    const auto stride = detail::unfold_strides(shape, n);
    DenseTensor<Scalar> t(shape);
    std::vector<Index> idx(shape.order(), 0);
    for (Index lin = 0; lin < t.size(); ++lin) {
        WideSize col = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) col += idx[k] * stride[k];
        t[lin] = m(static_cast<Eigen::Index>(idx[n]), static_cast<Eigen::Index>(col));
        shape.next(idx);
    }
    return t;
}

/// t x_n m : contracts mode n of t with the columns of m.
template <typename Scalar, typename Derived>
DenseTensor<Scalar> mode_n_product(const DenseTensor<Scalar>& t, const Eigen::MatrixBase<Derived>& m,
                                   std::size_t mode) {
    const std::size_t n = detail::checked_mode(mode, t.order());
    if (static_cast<Index>(m.cols()) != t.dim(n))
        throw DimensionError("mode_n_product: matrix has " + std::to_string(m.cols()) +
                             " columns, mode " + std::to_string(mode) + " has extent " +
                             std::to_string(t.dim(n)));
    std::vector<Index> dims = t.shape().dims();
    dims[n] = static_cast<Index>(m.rows());
    const MatrixX<Scalar> prod = m * unfold(t, mode);
    return fold(prod, mode, Shape(std::move(dims)));
}

/// v_1 o v_2 o ... o v_N.
template <typename Scalar>
DenseTensor<Scalar> outer_product(const std::vector<VectorX<Scalar>>& vectors) {
    if (vectors.empty()) throw DimensionError("outer_product: empty vector list");
    std::vector<Index> dims;
    for (const auto& v : vectors) {
        if (v.size() == 0) throw DimensionError("outer_product: empty vector");
        dims.push_back(static_cast<Index>(v.size()));
    }
    Shape shape(std::move(dims));
    VectorX<Scalar> acc = vectors.front();
    for (std::size_t k = 1; k < vectors.size(); ++k) {
        const auto& v = vectors[k];
        VectorX<Scalar> next(acc.size() * v.size());
        for (Eigen::Index i = 0; i < acc.size(); ++i) next.segment(i * v.size(), v.size()) = acc[i] * v;
        acc = std::move(next);
    }
    return DenseTensor<Scalar>(std::move(shape), std::move(acc));
}

/// Column-wise Kronecker product; row index is i_a * rows(b) + i_b.
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> khatri_rao(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b) {
    if (a.cols() != b.cols())
        throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.cols()) + ")");
    MatrixX<typename DerivedA::Scalar> out(a.rows() * b.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.cols(); ++r)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.col(r).segment(i * b.rows(), b.rows()) = a(i, r) * b.col(r);
    return out;
}

template <typename Scalar>
Scalar frobenius_norm(const DenseTensor<Scalar>& t) {
    return t.vec().norm();
}

template <typename Scalar>
Scalar inner_product(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b) {
    a.require_same_shape(b);
    return a.vec().dot(b.vec());
}

template <typename Scalar>
DenseTensor<Scalar> hadamard(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b) {
    a.require_same_shape(b);
    return DenseTensor<Scalar>(a.shape(), a.vec().cwiseProduct(b.vec()));
}

enum class NormKind { L1, L2, Inf };

/// p-norm for p in {1, 2, inf}; an empty vector has norm 0.
template <typename Derived>
typename Derived::Scalar vector_norm(const Eigen::MatrixBase<Derived>& v, NormKind p) {
    using Scalar = typename Derived::Scalar;
    if (v.size() == 0) return Scalar(0);
    switch (p) {
        case NormKind::L1: return v.cwiseAbs().sum();
        case NormKind::L2: return v.norm();
        case NormKind::Inf: return v.cwiseAbs().maxCoeff();
    }
    return Scalar(0);
}

/// Densify; refuses shapes whose storage would exceed budget_bytes.
template <typename Scalar>
DenseTensor<Scalar> sparse_to_dense(const SparseTensor<Scalar>& s, WideSize budget_bytes = kDefaultMemoryBudget) {
    const WideSize cells = s.size();
    WideSize bytes = 0;
    if (__builtin_mul_overflow(cells, static_cast<WideSize>(sizeof(Scalar)), &bytes) || bytes > budget_bytes)
        throw BudgetError("densifying shape " + s.shape().str() + " (" + std::to_string(cells) +
                          " cells) exceeds memory budget of " + std::to_string(budget_bytes) + " bytes");
    DenseTensor<Scalar> t(s.shape());
    for (const auto& [off, v] : s) t[static_cast<Index>(off)] = v;
    return t;
}

/// Keeps entries with |x| > tol.
template <typename Scalar>
SparseTensor<Scalar> dense_to_sparse(const DenseTensor<Scalar>& t, Scalar tol = Scalar(0)) {
    SparseTensor<Scalar> s(t.shape());
    for (Index i = 0; i < t.size(); ++i)
        if (std::abs(t[i]) > tol) s.set_offset(i, t[i]);
    return s;
}

}  // namespace multiway
