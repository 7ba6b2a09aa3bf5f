#include "multiway/tensorize.hpp"

#include "multiway/io.hpp"
#include "multiway/ops.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace multiway {

namespace {

ColumnSpec& column_entry(TensorizationPlan& plan, const std::string& name) {
    for (auto& c : plan)
        if (c.name == name) return c;
    plan.push_back(ColumnSpec{name});
    return plan.back();
}

bool all_numeric(const std::vector<std::string>& keys) {
    for (const auto& k : keys) {
        try {
            parse_double(k);
        } catch (const DataError&) {
            return false;
        }
    }
    return true;
}

// Incremental mean; exact when all values are equal.
template <typename Range>
double running_mean(const Range& values) {
    double m = 0.0;
    double k = 0.0;
    for (double x : values) {
        k += 1.0;
        m += (x - m) / k;
    }
    return m;
}

struct Cell {
    double sum = 0.0;
    double mean = 0.0;
    double last = 0.0;
    std::size_t count = 0;

    void add(double v) {
        ++count;
        sum += v;
        mean += (v - mean) / static_cast<double>(count);
        last = v;
    }

    double value(Aggregation a) const {
        switch (a) {
            case Aggregation::Mean: return mean;
            case Aggregation::Sum: return sum;
            case Aggregation::Last: return last;
            case Aggregation::Count: return static_cast<double>(count);
        }
        return 0.0;
    }
};

}  // namespace

Aggregation parse_aggregation(const std::string& s) {
    if (s == "mean") return Aggregation::Mean;
    if (s == "sum") return Aggregation::Sum;
    if (s == "last") return Aggregation::Last;
    if (s == "count") return Aggregation::Count;
    throw DataError("unknown aggregation '" + s + "' (expected mean|sum|last|count)");
}

std::string to_string(Aggregation a) {
    switch (a) {
        case Aggregation::Mean: return "mean";
        case Aggregation::Sum: return "sum";
        case Aggregation::Last: return "last";
        case Aggregation::Count: return "count";
    }
    return "mean";
}

TensorizationPlan parse_plan(std::istream& is, const std::string& source) {
    TensorizationPlan plan;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw DataError("expected 'column.field = value'", source, lineno);
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        const auto dot = key.rfind('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
            throw DataError("key '" + key + "' is not of the form column.field", source, lineno);
        ColumnSpec& col = column_entry(plan, key.substr(0, dot));
        const std::string field = key.substr(dot + 1);
        try {
            if (field == "role") {
                if (value == "coordinate")
                    col.role = ColumnRole::Coordinate;
                else if (value == "value")
                    col.role = ColumnRole::Value;
                else if (value == "ignored")
                    col.role = ColumnRole::Ignored;
                else
                    throw DataError("unknown role '" + value + "'");
            } else if (field == "mapping") {
                if (value == "identity" || value == "identity-integer")
                    col.mapping = KeyMapping::IdentityInteger;
                else if (value == "distinct" || value == "distinct-to-sequential")
                    col.mapping = KeyMapping::DistinctToSequential;
                else if (value == "bin")
                    col.mapping = KeyMapping::Bin;
                else
                    throw DataError("unknown mapping '" + value + "'");
            } else if (field == "bin_width") {
                col.bin_width = parse_double(value);
            } else if (field == "bin_origin") {
                col.bin_origin = parse_double(value);
            } else if (field == "aggregation") {
                col.aggregation = parse_aggregation(value);
            } else {
                throw DataError("unknown field '" + field + "'");
            }
        } catch (const DataError& e) {
            if (e.line() != 0) throw;
            throw DataError(e.what(), source, lineno);
        }
    }
    validate_plan(plan);
    return plan;
}

TensorizationPlan read_plan_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file", path);
    return parse_plan(in, path);
}

void validate_plan(const TensorizationPlan& plan) {
    std::size_t values = 0, coords = 0;
    for (const auto& c : plan) {
        if (c.role == ColumnRole::Value) ++values;
        if (c.role == ColumnRole::Coordinate) ++coords;
        if (c.mapping == KeyMapping::Bin && !(c.bin_width > 0.0))
            throw DataError("column '" + c.name + "': bin_width must be positive");
    }
    if (values != 1) throw DataError("plan must have exactly one value column, found " + std::to_string(values));
    if (coords < 1) throw DataError("plan must have at least one coordinate column");
}

AxisMap::AxisMap(std::vector<std::string> keys) : keys_(std::move(keys)) {
    for (Index i = 0; i < keys_.size(); ++i) {
        if (!forward_.emplace(keys_[i], i).second) throw DataError("duplicate axis key '" + keys_[i] + "'");
    }
}

Index AxisMap::index(const std::string& key) const {
    auto it = forward_.find(key);
    if (it == forward_.end()) throw DataError("unknown axis key '" + key + "'");
    return it->second;
}

TensorizedTable tensorize_table(const CsvTable& table, const TensorizationPlan& plan) {
    validate_plan(plan);
    std::vector<const ColumnSpec*> coords;
    const ColumnSpec* value_spec = nullptr;
    std::vector<std::size_t> coord_pos;
    std::size_t value_pos = 0;
    for (const auto& c : plan) {
        if (c.role == ColumnRole::Coordinate) {
            coords.push_back(&c);
            coord_pos.push_back(table.column(c.name));
        } else if (c.role == ColumnRole::Value) {
            value_spec = &c;
            value_pos = table.column(c.name);
        }
    }
    const std::size_t order = coords.size();
    if (table.rows.empty()) throw DataError("table has zero rows", table.source);

    auto fail = [&](std::size_t r, const std::string& what) -> DataError {
        return DataError(what, table.source, table.line_numbers.empty() ? 0 : table.line_numbers[r]);
    };

    // Pass 1: keys per coordinate (numeric bins/indices resolved here).
    TensorizedTable out;
    std::vector<std::vector<long long>> numeric(order);
    std::vector<std::set<std::string>> distinct(order);
    std::vector<long long> max_index(order, -1);
    std::vector<char> used(table.rows.size(), 0);
    std::vector<double> values(table.rows.size(), 0.0);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto vfield = trim(row[value_pos]);
        if (vfield.empty()) {
            ++out.skipped_rows;
            continue;
        }
        if (value_spec->aggregation != Aggregation::Count) {
            try {
                values[r] = parse_double(vfield);
            } catch (const DataError& e) {
                throw fail(r, "column '" + value_spec->name + "': " + e.what());
            }
        }
        used[r] = 1;
        for (std::size_t n = 0; n < order; ++n) {
            const auto& spec = *coords[n];
            const std::string field(trim(row[coord_pos[n]]));
            if (spec.mapping == KeyMapping::DistinctToSequential) {
                distinct[n].insert(field);
                continue;
            }
            long long idx = 0;
            try {
                if (spec.mapping == KeyMapping::IdentityInteger) {
                    idx = parse_integer(field);
                } else {
                    const double v = parse_double(field);
                    idx = static_cast<long long>(std::floor((v - spec.bin_origin) / spec.bin_width));
                }
            } catch (const DataError& e) {
                throw fail(r, "column '" + spec.name + "': " + e.what());
            }
            if (idx < 0) throw fail(r, "column '" + spec.name + "': negative coordinate index");
            numeric[n].push_back(idx);
            max_index[n] = std::max(max_index[n], idx);
        }
    }
    if (out.skipped_rows == table.rows.size()) throw DataError("table has zero usable rows", table.source);

    std::vector<Index> dims;
    for (std::size_t n = 0; n < order; ++n) {
        const auto& spec = *coords[n];
        std::vector<std::string> keys;
        if (spec.mapping == KeyMapping::DistinctToSequential) {
            keys.assign(distinct[n].begin(), distinct[n].end());
            if (all_numeric(keys)) {
                std::stable_sort(keys.begin(), keys.end(), [](const std::string& a, const std::string& b) {
                    return parse_double(a) < parse_double(b);
                });
            }
        } else {
            for (long long i = 0; i <= max_index[n]; ++i) {
                if (spec.mapping == KeyMapping::IdentityInteger)
                    keys.push_back(std::to_string(i));
                else
                    keys.push_back(format_scalar(spec.bin_origin + static_cast<double>(i) * spec.bin_width));
            }
        }
        out.axis_maps.emplace_back(std::move(keys));
        out.mode_names.push_back(spec.name);
        dims.push_back(out.axis_maps.back().extent());
    }
    const Shape shape(dims);

    // Pass 2: aggregate.
    std::map<WideSize, Cell> cells;
    std::vector<std::size_t> cursor(order, 0);
    std::vector<Index> idx(order);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (!used[r]) continue;
        for (std::size_t n = 0; n < order; ++n) {
            if (coords[n]->mapping == KeyMapping::DistinctToSequential)
                idx[n] = out.axis_maps[n].index(std::string(trim(table.rows[r][coord_pos[n]])));
            else
                idx[n] = static_cast<Index>(numeric[n][cursor[n]++]);
        }
        auto [it, inserted] = cells.try_emplace(shape.offset(idx));
        if (!inserted) ++out.collision_count;
        it->second.add(values[r]);
        ++out.rows_used;
    }
    out.cells = cells.size();
    out.tensor = Sparse(shape);
    for (const auto& [off, cell] : cells) out.tensor.set_offset(off, cell.value(value_spec->aggregation));
    return out;
}

void write_axis_maps(std::ostream& os, const TensorizedTable& t) {
    os << "mode,index,original_key\n";
    for (std::size_t n = 0; n < t.axis_maps.size(); ++n)
        for (Index i = 0; i < t.axis_maps[n].extent(); ++i)
            os << (n + 1) << ',' << i << ',' << csv_escape(t.axis_maps[n].key(i)) << '\n';
}

Sparse quantize(const Sparse& t, std::size_t mode, Index bin_size, Aggregation aggregation, Index origin_offset) {
    const std::size_t n = detail::checked_mode(mode, t.order());
    if (bin_size < 1) throw DimensionError("quantize: bin_size must be >= 1");
    std::vector<Index> dims = t.shape().dims();
    dims[n] = (dims[n] + origin_offset + bin_size - 1) / bin_size;
    const Shape shape(dims);
    std::map<WideSize, Cell> cells;
    for (const auto& [off, v] : t) {
        auto idx = t.index_of(off);
        idx[n] = (idx[n] + origin_offset) / bin_size;
        cells[shape.offset(idx)].add(v);
    }
    Sparse out(shape);
    for (const auto& [off, cell] : cells) out.set_offset(off, cell.value(aggregation));
    return out;
}

Tensor segment(const Vector& v, const Shape& shape) {
    if (static_cast<WideSize>(v.size()) != shape.size())
        throw DimensionError("segment: vector length " + std::to_string(v.size()) + " does not match shape " +
                             shape.str());
    return Tensor(shape, v);
}

Vector desegment(const Tensor& t) { return t.vec(); }

Matrix hankelize(const Vector& v, Index window) {
    const auto T = static_cast<Index>(v.size());
    if (window < 1 || window > T)
        throw DimensionError("hankelize: window " + std::to_string(window) + " out of range 1.." + std::to_string(T));
    const auto L = static_cast<Eigen::Index>(window);
    const auto J = static_cast<Eigen::Index>(T - window + 1);
    Matrix h(L, J);
    for (Eigen::Index j = 0; j < J; ++j)
        for (Eigen::Index i = 0; i < L; ++i) h(i, j) = v[i + j];
    return h;
}

Tensor hankelize_channels(const Matrix& x, Index window) {
    const auto T = static_cast<Index>(x.cols());
    if (window < 1 || window > T)
        throw DimensionError("hankelize_channels: window " + std::to_string(window) + " out of range 1.." +
                             std::to_string(T));
    const Index L = window, J = T - window + 1, C = static_cast<Index>(x.rows());
    Tensor t(Shape{L, J, C});
    for (Index i = 0; i < L; ++i)
        for (Index j = 0; j < J; ++j)
            for (Index c = 0; c < C; ++c)
                t[(i * J + j) * C + c] = x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i + j));
    return t;
}

Vector dehankelize(const Matrix& h) {
    if (h.size() == 0) throw DimensionError("dehankelize: empty matrix");
    const Eigen::Index L = h.rows(), J = h.cols();
    Vector v(L + J - 1);
    for (Eigen::Index s = 0; s < v.size(); ++s) {
        double m = 0.0, k = 0.0;
        for (Eigen::Index i = std::max<Eigen::Index>(0, s - J + 1); i <= std::min(s, L - 1); ++i) {
            k += 1.0;
            m += (h(i, s - i) - m) / k;
        }
        v[s] = m;
    }
    return v;
}

double central_moments(const Vector& sample, int order) {
    if (sample.size() == 0) throw DimensionError("central_moments: empty sample");
    if (order < 1) throw DimensionError("central_moments: order must be >= 1");
    if (order == 1) return 0.0;
    const double mu = running_mean(sample);
    double acc = 0.0;
    for (double x : sample) acc += std::pow(x - mu, order);
    return acc / static_cast<double>(sample.size());
}

namespace {

Matrix center_columns(const Matrix& x) {
    Matrix c = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) c.col(j).array() -= running_mean(x.col(j));
    return c;
}

}  // namespace

Tensor cumulant_tensor(const Matrix& x, int order) {
    if (order != 3 && order != 4) throw DimensionError("cumulant_tensor: order must be 3 or 4");
    if (x.rows() < 2) throw DimensionError("cumulant_tensor: at least 2 observations required");
    const Matrix c = center_columns(x);
    const auto d = static_cast<Index>(x.cols());
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    const Matrix second = (c.transpose() * c) * inv_n;

    std::vector<Index> dims(static_cast<std::size_t>(order), d);
    Tensor k{Shape(dims)};
    std::vector<Index> idx(static_cast<std::size_t>(order), 0);
    // Visit nondecreasing tuples, then scatter to every permutation.
    for (;;) {
        double value = 0.0;
        const auto i = static_cast<Eigen::Index>(idx[0]), j = static_cast<Eigen::Index>(idx[1]),
                   l = static_cast<Eigen::Index>(idx[2]);
        if (order == 3) {
            value = (c.col(i).array() * c.col(j).array() * c.col(l).array()).sum() * inv_n;
        } else {
            const auto m = static_cast<Eigen::Index>(idx[3]);
            const double fourth = (c.col(i).array() * c.col(j).array() * c.col(l).array() * c.col(m).array()).sum() * inv_n;
            value = fourth - second(i, j) * second(l, m) - second(i, l) * second(j, m) - second(i, m) * second(j, l);
        }
        std::vector<Index> perm = idx;
        do {
            k.at(perm) = value;
        } while (std::next_permutation(perm.begin(), perm.end()));

        // next nondecreasing tuple
        std::size_t p = idx.size();
        while (p > 0 && idx[p - 1] + 1 == d) --p;
        if (p == 0) break;
        ++idx[p - 1];
        for (std::size_t q = p; q < idx.size(); ++q) idx[q] = idx[p - 1];
    }
    return k;
}

Tensor lagged_covariance(const Matrix& x, const std::vector<Index>& lags) {
    const auto T = static_cast<Index>(x.cols());
    if (lags.empty()) throw DimensionError("lagged_covariance: no lags given");
    for (Index lag : lags)
        if (lag >= T)
            throw DimensionError("lagged_covariance: lag " + std::to_string(lag) + " must be < sample count " +
                                 std::to_string(T));
    const Matrix c = center_columns(x.transpose()).transpose();  // d x T
    const auto d = static_cast<Index>(x.rows());
    Tensor out(Shape{d, d, lags.size()});
    for (std::size_t s = 0; s < lags.size(); ++s) {
        const auto tau = static_cast<Eigen::Index>(lags[s]);
        const Eigen::Index len = static_cast<Eigen::Index>(T) - tau;
        const Matrix slice = (c.leftCols(len) * c.middleCols(tau, len).transpose()) / static_cast<double>(len);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j)
                out[(i * d + j) * lags.size() + s] = slice(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return out;
}

Tensor higher_order_covariance(const std::vector<Tensor>& observations) {
    if (observations.size() < 2) throw DimensionError("higher_order_covariance: at least 2 observations required");
    const Shape& shape = observations.front().shape();
    Matrix x(static_cast<Eigen::Index>(observations.size()), static_cast<Eigen::Index>(shape.size()));
    for (std::size_t k = 0; k < observations.size(); ++k) {
        if (!(observations[k].shape() == shape))
            throw DimensionError("higher_order_covariance: observation " + std::to_string(k) + " has shape " +
                                 observations[k].shape().str() + ", expected " + shape.str());
        x.row(static_cast<Eigen::Index>(k)) = observations[k].vec().transpose();
    }
    const Matrix c = center_columns(x);
    const Matrix cov = (c.transpose() * c) / static_cast<double>(x.rows() - 1);
    std::vector<Index> dims = shape.dims();
    dims.insert(dims.end(), shape.dims().begin(), shape.dims().end());
    RowMajorMatrixX<double> rm = cov;
    return Tensor(Shape(dims), Eigen::Map<const Vector>(rm.data(), rm.size()));
}

}  // namespace multiway
