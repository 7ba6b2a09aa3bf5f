#include "multiway/compress.hpp"

#include "multiway/io.hpp"

#include <numeric>

namespace multiway {

namespace {

Index product(const std::vector<Index>& v) {
    return std::accumulate(v.begin(), v.end(), Index{1}, std::multiplies<>());
}

void check_factorization(const std::vector<Index>& input_dims, const std::vector<Index>& output_dims) {
    if (input_dims.empty() || input_dims.size() != output_dims.size())
        throw DimensionError("TT layer: input and output factorizations must have the same nonzero length");
    for (Index v : input_dims)
        if (v < 1) throw DimensionError("TT layer: factors must be >= 1");
    for (Index v : output_dims)
        if (v < 1) throw DimensionError("TT layer: factors must be >= 1");
}

}  // namespace

Index TtLayer::input_size() const { return product(input_dims); }
Index TtLayer::output_size() const { return product(output_dims); }

std::vector<Index> TtLayer::ranks() const {
    std::vector<Index> r;
    if (cores.empty()) return r;
    r.push_back(cores.front().dim(0));
    for (const auto& c : cores) r.push_back(c.dim(3));
    return r;
}

void TtLayer::validate() const {
    check_factorization(input_dims, output_dims);
    if (cores.size() != input_dims.size()) throw DimensionError("TT layer: core count differs from factorization length");
    for (std::size_t k = 0; k < cores.size(); ++k) {
        const Tensor& g = cores[k];
        if (g.order() != 4) throw DimensionError("TT layer: core " + std::to_string(k + 1) + " is not 4-way");
        if (g.dim(1) != output_dims[k] || g.dim(2) != input_dims[k])
            throw DimensionError("TT layer: core " + std::to_string(k + 1) + " does not match the factorization");
        if (k > 0 && g.dim(0) != cores[k - 1].dim(3))
            throw DimensionError("TT layer: inconsistent ranks between cores " + std::to_string(k) + " and " +
                                 std::to_string(k + 1));
    }
    if (cores.front().dim(0) != 1 || cores.back().dim(3) != 1) throw DimensionError("TT layer: boundary ranks must be 1");
    if (static_cast<Index>(bias.size()) != output_size()) throw DimensionError("TT layer: bias length differs from output size");
}

TtLayer matrix_to_tt_layer(const Matrix& w, const Vector& b, const std::vector<Index>& input_dims,
                           const std::vector<Index>& output_dims, const TtLayerOptions& opts) {
    check_factorization(input_dims, output_dims);
    const Index M = product(input_dims), N = product(output_dims);
    if (static_cast<Index>(w.rows()) != N || static_cast<Index>(w.cols()) != M)
        throw DimensionError("matrix_to_tt_layer: weights are " + std::to_string(w.rows()) + "x" +
                             std::to_string(w.cols()) + ", factorizations give " + std::to_string(N) + "x" +
                             std::to_string(M));
    if (static_cast<Index>(b.size()) != N) throw DimensionError("matrix_to_tt_layer: bias length differs from output size");
    const std::size_t d = input_dims.size();

    // Weight tensor with mode k indexed by i_k * m_k + j_k.
    std::vector<Index> dims(d);
    for (std::size_t k = 0; k < d; ++k) dims[k] = output_dims[k] * input_dims[k];
    const Shape tshape(dims);
    const Shape out_shape(output_dims), in_shape(input_dims);
    Tensor wt(tshape);
    std::vector<Index> i(d), j(d), t(d);
    for (Index row = 0; row < N; ++row) {
        out_shape.unravel(row, i);
        for (Index col = 0; col < M; ++col) {
            in_shape.unravel(col, j);
            for (std::size_t k = 0; k < d; ++k) t[k] = i[k] * input_dims[k] + j[k];
            wt.at(t) = w(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
        }
    }

    TtLayer layer;
    layer.input_dims = input_dims;
    layer.output_dims = output_dims;
    layer.bias = b;
    if (!(frobenius_norm(wt) > 0.0)) {
        for (std::size_t k = 0; k < d; ++k) layer.cores.emplace_back(Shape{1, output_dims[k], input_dims[k], 1});
        return layer;
    }
    const TtFit fit = tt_svd(wt, TtOptions{opts.max_ranks, opts.tol});
    for (std::size_t k = 0; k < d; ++k) {
        const Tensor& c = fit.model.cores[k];
        layer.cores.push_back(c.reshaped(Shape{c.dim(0), output_dims[k], input_dims[k], c.dim(2)}));
    }
    return layer;
}

Vector tt_layer_forward(const TtLayer& layer, const Vector& x) {
    layer.validate();
    if (static_cast<Index>(x.size()) != layer.input_size())
        throw DimensionError("tt_layer_forward: input length " + std::to_string(x.size()) + ", expected " +
                             std::to_string(layer.input_size()));
    const std::size_t d = layer.cores.size();
    // z holds (P, r, m_k, Q): P finished output indices, r current rank, m_k the next
    // input index and Q the remaining input indices.
    Vector z = x;
    Index P = 1;
    Index Q = layer.input_size();
    for (std::size_t k = 0; k < d; ++k) {
        const Tensor& g = layer.cores[k];
        const Index ra = g.dim(0), n = g.dim(1), m = g.dim(2), rb = g.dim(3);
        Q /= m;
        Vector next = Vector::Zero(static_cast<Eigen::Index>(P * n * rb * Q));
        for (Index p = 0; p < P; ++p)
            for (Index a = 0; a < ra; ++a)
                for (Index jj = 0; jj < m; ++jj) {
                    const auto zoff = static_cast<Eigen::Index>(((p * ra + a) * m + jj) * Q);
                    const auto zq = z.segment(zoff, static_cast<Eigen::Index>(Q));
                    for (Index ii = 0; ii < n; ++ii)
                        for (Index bb = 0; bb < rb; ++bb) {
                            const double gv = g[((a * n + ii) * m + jj) * rb + bb];
                            if (gv == 0.0) continue;
                            const auto noff = static_cast<Eigen::Index>(((p * n + ii) * rb + bb) * Q);
                            next.segment(noff, static_cast<Eigen::Index>(Q)) += gv * zq;
                        }
                }
        z = std::move(next);
        P *= n;
    }
    return z + layer.bias;
}

Matrix tt_layer_dense_weights(const TtLayer& layer) {
    layer.validate();
    const Index M = layer.input_size(), N = layer.output_size();
    Matrix w(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
    TtLayer unbiased = layer;
    unbiased.bias.setZero();
    for (Index col = 0; col < M; ++col)
        w.col(static_cast<Eigen::Index>(col)) = tt_layer_forward(unbiased, Vector::Unit(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(col)));
    return w;
}

CompressionReport compression_report(const std::vector<Index>& input_dims, const std::vector<Index>& output_dims,
                                     const std::vector<Index>& ranks) {
    check_factorization(input_dims, output_dims);
    if (ranks.size() != input_dims.size() + 1) throw DimensionError("compression_report: need d + 1 ranks");
    if (ranks.front() != 1 || ranks.back() != 1) throw DimensionError("compression_report: boundary ranks must be 1");
    CompressionReport r;
    const auto M = static_cast<WideSize>(product(input_dims)), N = static_cast<WideSize>(product(output_dims));
    r.dense_weight_params = M * N;
    for (std::size_t k = 0; k < input_dims.size(); ++k) {
        if (ranks[k + 1] < 1) throw DimensionError("compression_report: ranks must be >= 1");
        r.tt_weight_params += static_cast<WideSize>(ranks[k]) * output_dims[k] * input_dims[k] * ranks[k + 1];
    }
    r.dense_params = r.dense_weight_params + N;
    r.tt_params = r.tt_weight_params + N;
    r.ratio = static_cast<double>(r.dense_params) / static_cast<double>(r.tt_params);
    r.weight_ratio = static_cast<double>(r.dense_weight_params) / static_cast<double>(r.tt_weight_params);
    return r;
}

CompressionReport compression_report(const TtLayer& layer) {
    layer.validate();
    return compression_report(layer.input_dims, layer.output_dims, layer.ranks());
}

ModelContainer to_container(const TtLayer& layer) {
    layer.validate();
    ModelContainer c;
    c.kind = "tt-layer";
    c.headers = {{"m", join_indices(layer.input_dims)},
                 {"n", join_indices(layer.output_dims)},
                 {"ranks", join_indices(layer.ranks())}};
    for (std::size_t k = 0; k < layer.cores.size(); ++k) c.blocks.emplace_back("core " + std::to_string(k + 1), layer.cores[k]);
    c.blocks.emplace_back("bias", from_vector(layer.bias));
    return c;
}

TtLayer tt_layer_from_container(const ModelContainer& c) {
    if (c.kind != "tt-layer") throw DataError("expected model kind 'tt-layer', got '" + c.kind + "'");
    TtLayer layer;
    layer.input_dims = parse_index_list(c.header("m"));
    layer.output_dims = parse_index_list(c.header("n"));
    for (std::size_t k = 0; k < layer.input_dims.size(); ++k) layer.cores.push_back(c.block("core " + std::to_string(k + 1)));
    layer.bias = c.block("bias").vec();
    layer.validate();
    return layer;
}

}  // namespace multiway
