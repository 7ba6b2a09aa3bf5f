#pragma once

#include "multiway/error.hpp"

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace multiway {

using Index = std::size_t;
/// Cell counts of a full N-way grid; wide enough for shapes that are never materialized.
using WideSize = std::uint64_t;

/// Ordered mode extents I_1..I_N with the canonical (last index fastest) layout.
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<Index> dims) : Shape(std::vector<Index>(dims)) {}
    explicit Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
        if (dims_.empty()) throw DimensionError("shape must have at least one mode");
        size_ = 1;
        for (Index d : dims_) {
            if (d == 0) throw DimensionError("shape extents must be >= 1");
            if (__builtin_mul_overflow(size_, static_cast<WideSize>(d), &size_))
                throw DimensionError("shape size overflows 64-bit cell count");
        }
    }

    std::size_t order() const noexcept { return dims_.size(); }
    Index operator[](std::size_t mode) const { return dims_.at(mode); }
    const std::vector<Index>& dims() const noexcept { return dims_; }
    WideSize size() const noexcept { return size_; }
    bool empty() const noexcept { return dims_.empty(); }

    /// Linear offset of a multi-index. Bounds are checked.
    WideSize offset(std::span<const Index> idx) const {
        if (idx.size() != dims_.size()) throw DimensionError("index order does not match shape order");
        WideSize off = 0;
        for (std::size_t n = 0; n < dims_.size(); ++n) {
            if (idx[n] >= dims_[n])
                throw DimensionError("index " + std::to_string(idx[n]) + " out of bounds for mode " +
                                     std::to_string(n + 1) + " of extent " + std::to_string(dims_[n]));
            off = off * dims_[n] + idx[n];
        }
        return off;
    }

    /// Inverse of offset().
    void unravel(WideSize off, std::span<Index> idx) const {
        for (std::size_t n = dims_.size(); n-- > 0;) {
            idx[n] = static_cast<Index>(off % dims_[n]);
            off /= dims_[n];
        }
    }

    std::vector<Index> unravel(WideSize off) const {
        std::vector<Index> idx(dims_.size());
        unravel(off, idx);
        return idx;
    }

    /// Advances idx to the next multi-index in canonical order; false after the last one.
    bool next(std::span<Index> idx) const {
        for (std::size_t n = dims_.size(); n-- > 0;) {
            if (++idx[n] < dims_[n]) return true;
            idx[n] = 0;
        }
        return false;
    }

    /// "(2,5,40)"
    std::string str() const {
        std::string s = "(";
        for (std::size_t n = 0; n < dims_.size(); ++n) {
            if (n) s += ",";
            s += std::to_string(dims_[n]);
        }
        return s + ")";
    }

    friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

private:
    std::vector<Index> dims_;
    WideSize size_ = 0;
};

}  // namespace multiway
