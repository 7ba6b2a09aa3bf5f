#pragma once

#include "multiway/shape.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <utility>

namespace multiway {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowMajorMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Dense N-way array. Entries are stored flat with the last index varying fastest.
template <typename Scalar>
class DenseTensor {
public:
    using scalar_type = Scalar;
    using FlatVector = VectorX<Scalar>;

    DenseTensor() = default;

    explicit DenseTensor(Shape shape) : shape_(std::move(shape)) {
        data_ = FlatVector::Zero(static_cast<Eigen::Index>(shape_.size()));
    }

    DenseTensor(Shape shape, FlatVector data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (static_cast<WideSize>(data_.size()) != shape_.size())
            throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                                 " does not match shape " + shape_.str());
    }

    static DenseTensor constant(Shape shape, Scalar value) {
        DenseTensor t(std::move(shape));
        t.data_.setConstant(value);
        return t;
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.order(); }
    Index dim(std::size_t mode) const { return shape_[mode]; }
    Index size() const noexcept { return static_cast<Index>(data_.size()); }

    /// Flat canonical storage, usable in Eigen expressions.
    FlatVector& vec() noexcept { return data_; }
    const FlatVector& vec() const noexcept { return data_; }
    Scalar* data() noexcept { return data_.data(); }
    const Scalar* data() const noexcept { return data_.data(); }

    Scalar& operator[](Index linear) { return data_[static_cast<Eigen::Index>(linear)]; }
    const Scalar& operator[](Index linear) const { return data_[static_cast<Eigen::Index>(linear)]; }

    Scalar& at(std::span<const Index> idx) { return (*this)[static_cast<Index>(shape_.offset(idx))]; }
    const Scalar& at(std::span<const Index> idx) const {
        return (*this)[static_cast<Index>(shape_.offset(idx))];
    }

    template <typename... Idx>
    Scalar& operator()(Idx... idx) {
        const std::array<Index, sizeof...(Idx)> i{static_cast<Index>(idx)...};
        return at(i);
    }
    template <typename... Idx>
    const Scalar& operator()(Idx... idx) const {
        const std::array<Index, sizeof...(Idx)> i{static_cast<Index>(idx)...};
        return at(i);
    }

    /// Same data under a new shape of equal size.
    DenseTensor reshaped(Shape shape) const { return DenseTensor(std::move(shape), data_); }

    DenseTensor& operator+=(const DenseTensor& o) {
        require_same_shape(o);
        data_ += o.data_;
        return *this;
    }
    DenseTensor& operator-=(const DenseTensor& o) {
        require_same_shape(o);
        data_ -= o.data_;
        return *this;
    }
    DenseTensor& operator*=(Scalar s) {
        data_ *= s;
        return *this;
    }

    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
    friend DenseTensor operator*(DenseTensor a, Scalar s) { return a *= s; }
    friend DenseTensor operator*(Scalar s, DenseTensor a) { return a *= s; }

    friend bool operator==(const DenseTensor& a, const DenseTensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

    void require_same_shape(const DenseTensor& o) const {
        if (!(shape_ == o.shape_))
            throw DimensionError("shape mismatch: " + shape_.str() + " vs " + o.shape_.str());
    }

private:
    Shape shape_;
    FlatVector data_;
};

using Tensor = DenseTensor<double>;

/// 2-way tensor from a matrix (entry (i,j) preserved).
template <typename Derived>
DenseTensor<typename Derived::Scalar> from_matrix(const Eigen::MatrixBase<Derived>& m) {
    using S = typename Derived::Scalar;
    RowMajorMatrixX<S> rm = m;
    return DenseTensor<S>(Shape{static_cast<Index>(m.rows()), static_cast<Index>(m.cols())},
                          Eigen::Map<const VectorX<S>>(rm.data(), rm.size()));
}

template <typename Scalar>
MatrixX<Scalar> to_matrix(const DenseTensor<Scalar>& t) {
    if (t.order() != 2) throw DimensionError("to_matrix requires a 2-way tensor, got " + t.shape().str());
    return Eigen::Map<const RowMajorMatrixX<Scalar>>(t.data(), static_cast<Eigen::Index>(t.dim(0)),
                                                     static_cast<Eigen::Index>(t.dim(1)));
}

/// 1-way tensor holding a copy of v.
template <typename Derived>
DenseTensor<typename Derived::Scalar> from_vector(const Eigen::MatrixBase<Derived>& v) {
    return DenseTensor<typename Derived::Scalar>(Shape{static_cast<Index>(v.size())}, v);
}

}  // namespace multiway
