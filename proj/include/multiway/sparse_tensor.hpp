#pragma once

#include "multiway/shape.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace multiway {

/// N-way tensor as a coordinate map. Keys are canonical linear offsets, so
/// iteration visits entries in canonical (last index fastest) order and the
/// shape never has to be materialized.
template <typename Scalar>
class SparseTensor {
public:
    using Map = std::map<WideSize, Scalar>;

    SparseTensor() = default;
    explicit SparseTensor(Shape shape) : shape_(std::move(shape)) {}

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.order(); }
    std::size_t nnz() const noexcept { return entries_.size(); }
    WideSize size() const noexcept { return shape_.size(); }
    double density() const noexcept {
        return static_cast<double>(entries_.size()) / static_cast<double>(shape_.size());
    }

    /// Inserting zero removes the entry; an existing entry is overwritten.
    void set(std::span<const Index> idx, Scalar value) { set_offset(shape_.offset(idx), value); }

    void set_offset(WideSize off, Scalar value) {
        if (off >= shape_.size()) throw DimensionError("sparse offset out of bounds");
        if (value == Scalar(0))
            entries_.erase(off);
        else
            entries_[off] = value;
    }

    Scalar get(std::span<const Index> idx) const { return get_offset(shape_.offset(idx)); }

    Scalar get_offset(WideSize off) const {
        auto it = entries_.find(off);
        return it == entries_.end() ? Scalar(0) : it->second;
    }

    bool contains(std::span<const Index> idx) const { return entries_.count(shape_.offset(idx)) > 0; }

    std::vector<Index> index_of(WideSize off) const { return shape_.unravel(off); }

    const Map& entries() const noexcept { return entries_; }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    friend bool operator==(const SparseTensor& a, const SparseTensor& b) {
        return a.shape_ == b.shape_ && a.entries_ == b.entries_;
    }

private:
    Shape shape_;
    Map entries_;
};

using Sparse = SparseTensor<double>;

}  // namespace multiway
