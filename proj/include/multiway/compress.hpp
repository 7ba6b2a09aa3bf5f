#pragma once

// Fully connected layers y = W x + b with W stored in tensor-train (TT-matrix) format.

#include "multiway/decomp.hpp"
#include "multiway/model_io.hpp"

#include <vector>

namespace multiway {

/// W (N x M) with M = prod m_k inputs and N = prod n_k outputs. Core k has shape
/// r_{k-1} x n_k x m_k x r_k, r_0 = r_d = 1; mode k of the weight tensor pairs
/// output index i_k with input index j_k.
struct TtLayer {
    std::vector<Index> input_dims;   // m_1..m_d
    std::vector<Index> output_dims;  // n_1..n_d
    std::vector<Tensor> cores;
    Vector bias;  // length N

    Index input_size() const;
    Index output_size() const;
    std::vector<Index> ranks() const;  // r_0..r_d
    void validate() const;
};

struct TtLayerOptions {
    std::vector<Index> max_ranks;  // as TtOptions
    double tol = 0.0;
};

/// Factor the weights of y = W x + b. W is output_size x input_size.
TtLayer matrix_to_tt_layer(const Matrix& w, const Vector& b, const std::vector<Index>& input_dims,
                           const std::vector<Index>& output_dims, const TtLayerOptions& opts = {});

/// y = W x + b computed core by core; W is never formed.
Vector tt_layer_forward(const TtLayer& layer, const Vector& x);

/// Dense N x M matrix represented by the layer (for verification).
Matrix tt_layer_dense_weights(const TtLayer& layer);

struct CompressionReport {
    WideSize dense_params = 0;        // M N + N
    WideSize tt_params = 0;           // sum_k r_{k-1} n_k m_k r_k + N
    WideSize dense_weight_params = 0; // M N
    WideSize tt_weight_params = 0;    // sum_k r_{k-1} n_k m_k r_k
    double ratio = 0.0;               // dense_params / tt_params
    double weight_ratio = 0.0;        // dense_weight_params / tt_weight_params
};

CompressionReport compression_report(const TtLayer& layer);
/// Same counts from the factorization and the rank vector r_0..r_d alone.
CompressionReport compression_report(const std::vector<Index>& input_dims, const std::vector<Index>& output_dims,
                                     const std::vector<Index>& ranks);

ModelContainer to_container(const TtLayer& layer);
TtLayer tt_layer_from_container(const ModelContainer& c);

}  // namespace multiway
