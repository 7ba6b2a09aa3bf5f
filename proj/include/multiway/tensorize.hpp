#pragma once

// Turning tables and signals into tensors: coordinate mapping, quantization,
// segmentation, Hankelization and statistical tensors.

#include "multiway/csv.hpp"
#include "multiway/dense_tensor.hpp"
#include "multiway/sparse_tensor.hpp"

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace multiway {

enum class ColumnRole { Coordinate, Value, Ignored };
enum class KeyMapping { IdentityInteger, DistinctToSequential, Bin };
enum class Aggregation { Mean, Sum, Last, Count };

struct ColumnSpec {
    std::string name;
    ColumnRole role = ColumnRole::Ignored;
    KeyMapping mapping = KeyMapping::DistinctToSequential;
    double bin_width = 1.0;
    double bin_origin = 0.0;
    Aggregation aggregation = Aggregation::Mean;
};

using TensorizationPlan = std::vector<ColumnSpec>;

/// Reads a plan from "column.field = value" lines, e.g.
///   age.role = coordinate
///   age.mapping = bin
///   age.bin_width = 5
///   wage.role = value
///   wage.aggregation = mean
/// Coordinate modes follow the order in which columns first appear.
TensorizationPlan parse_plan(std::istream& is, const std::string& source = {});
TensorizationPlan read_plan_file(const std::string& path);
void validate_plan(const TensorizationPlan& plan);

Aggregation parse_aggregation(const std::string& s);
std::string to_string(Aggregation a);

/// Bijection between the distinct original keys of a coordinate column and 0..extent-1.
class AxisMap {
public:
    AxisMap() = default;
    explicit AxisMap(std::vector<std::string> keys);

    Index extent() const noexcept { return keys_.size(); }
    const std::vector<std::string>& keys() const noexcept { return keys_; }
    const std::string& key(Index i) const { return keys_.at(i); }
    /// Throws DataError for an unknown key.
    Index index(const std::string& key) const;

private:
    std::vector<std::string> keys_;
    std::unordered_map<std::string, Index> forward_;
};

struct TensorizedTable {
    Sparse tensor;
    std::vector<AxisMap> axis_maps;
    std::vector<std::string> mode_names;
    std::size_t cells = 0;            // distinct coordinate tuples (pivot-table rows)
    std::size_t collision_count = 0;  // rows landing on an already-filled cell
    std::size_t skipped_rows = 0;     // rows with an empty value field
    std::size_t rows_used = 0;
};

TensorizedTable tensorize_table(const CsvTable& table, const TensorizationPlan& plan);

/// "mode,index,original_key" lines (1-based mode), with a header row.
void write_axis_maps(std::ostream& os, const TensorizedTable& t);

/// Bins consecutive indices of one mode: index i goes to bin (i + origin_offset) / bin_size,
/// so the new extent is ceil((extent + origin_offset) / bin_size). Entries sharing a bin
/// (and all other coordinates) are combined; Mean averages the stored entries.
Sparse quantize(const Sparse& t, std::size_t mode, Index bin_size, Aggregation aggregation,
                Index origin_offset = 0);

/// Reshape a vector into shape under the canonical layout, and back.
Tensor segment(const Vector& v, const Shape& shape);
Vector desegment(const Tensor& t);

/// H(i, j) = v(i + j); L x (T - L + 1).
Matrix hankelize(const Vector& v, Index window);

/// Channels-by-samples input to an L x (T - L + 1) x C tensor, slice c = hankelize(row c).
Tensor hankelize_channels(const Matrix& x, Index window);

/// Anti-diagonal means; exact inverse of hankelize on Hankel matrices.
Vector dehankelize(const Matrix& h);

/// Population central moment E[(X - E X)^n]; order 1 is 0.
double central_moments(const Vector& sample, int order);

/// Order-3 or order-4 joint cumulant tensor of the columns of x (observations x variables).
Tensor cumulant_tensor(const Matrix& x, int order);

/// d x d x |lags| tensor of lagged covariances of the rows of x (variables x samples).
Tensor lagged_covariance(const Matrix& x, const std::vector<Index>& lags);

/// Sample covariance of flattened observations, reshaped to the doubled observation shape.
Tensor higher_order_covariance(const std::vector<Tensor>& observations);

}  // namespace multiway
