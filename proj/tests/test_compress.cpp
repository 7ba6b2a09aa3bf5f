#include "multiway/compress.hpp"
#include "multiway/error.hpp"
#include "multiway/model_io.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace multiway;
using testing_support::gaussian;

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
}

WideSize stored_scalars(const TtLayer& l) {
    WideSize n = 0;
    for (const auto& c : l.cores) n += c.size();
    return n;
}

}  // namespace

TEST(TtLayer, SingleCoreIsTheMatrix) {
    std::mt19937_64 rng(1);
    const Matrix w = gaussian(3, 5, rng);
    const TtLayer l = matrix_to_tt_layer(w, Vector::Zero(3), {5}, {3});
    EXPECT_EQ(l.ranks(), (std::vector<Index>{1, 1}));
    EXPECT_LT((tt_layer_dense_weights(l) - w).cwiseAbs().maxCoeff(), 1e-14);
    const CompressionReport r = compression_report(l);
    EXPECT_DOUBLE_EQ(r.weight_ratio, 1.0);
}

TEST(TtLayer, KroneckerWeightsHaveUnitRanks) {
    std::mt19937_64 rng(2);
    const Matrix w1 = gaussian(3, 2, rng), w2 = gaussian(4, 5, rng);
    const Matrix w = kron(w1, w2);  // 12 x 10
    const TtLayer l = matrix_to_tt_layer(w, Vector::Zero(12), {2, 5}, {3, 4});
    EXPECT_EQ(l.ranks(), (std::vector<Index>{1, 1, 1}));
    EXPECT_LT((tt_layer_dense_weights(l) - w).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TtLayer, FullRankForwardMatchesDense) {
    std::mt19937_64 rng(3);
    const Matrix w = gaussian(16, 16, rng);
    const Vector b = gaussian(16, 1, rng).col(0);
    const TtLayer l = matrix_to_tt_layer(w, b, {4, 4}, {4, 4});
    for (int i = 0; i < 100; ++i) {
        const Vector x = gaussian(16, 1, rng).col(0);
        EXPECT_LT((tt_layer_forward(l, x) - (w * x + b)).cwiseAbs().maxCoeff(), 1e-8);
    }
    EXPECT_EQ(tt_layer_forward(l, Vector::Zero(16)), b);
}

TEST(TtLayer, RectangularThreeCores) {
    std::mt19937_64 rng(4);
    const Matrix w = gaussian(6, 24, rng);  // n = (1,2,3), m = (2,3,4)
    const Vector b = gaussian(6, 1, rng).col(0);
    const TtLayer l = matrix_to_tt_layer(w, b, {2, 3, 4}, {1, 2, 3});
    const Vector x = gaussian(24, 1, rng).col(0);
    EXPECT_LT((tt_layer_forward(l, x) - (w * x + b)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TtLayer, Linearity) {
    std::mt19937_64 rng(5);
    const TtLayer l = matrix_to_tt_layer(gaussian(8, 12, rng), gaussian(8, 1, rng).col(0), {3, 4}, {2, 4});
    const Vector x1 = gaussian(12, 1, rng).col(0), x2 = gaussian(12, 1, rng).col(0);
    const Vector lhs = tt_layer_forward(l, x1 + x2) - l.bias;
    const Vector rhs = (tt_layer_forward(l, x1) - l.bias) + (tt_layer_forward(l, x2) - l.bias);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TtLayer, TruncatedOperatorBound) {
    std::mt19937_64 rng(6);
    const Matrix w = gaussian(16, 16, rng);
    TtLayerOptions o;
    o.max_ranks = {3};
    const TtLayer l = matrix_to_tt_layer(w, Vector::Zero(16), {4, 4}, {4, 4}, o);
    const Matrix what = tt_layer_dense_weights(l);
    for (int i = 0; i < 20; ++i) {
        const Vector x = gaussian(16, 1, rng).col(0);
        EXPECT_LE((tt_layer_forward(l, x) - w * x).norm(), (w - what).norm() * x.norm() * (1 + 1e-12));
        EXPECT_LT((tt_layer_forward(l, x) - what * x).norm(), 1e-10);
    }
}

TEST(TtLayer, Validation) {
    std::mt19937_64 rng(7);
    const Matrix w = gaussian(4, 6, rng);
    EXPECT_THROW((void)matrix_to_tt_layer(w, Vector::Zero(4), {2, 2}, {2, 2}), DimensionError);
    EXPECT_THROW((void)matrix_to_tt_layer(w, Vector::Zero(3), {2, 3}, {2, 2}), DimensionError);
    EXPECT_THROW((void)matrix_to_tt_layer(w, Vector::Zero(4), {6}, {2, 2}), DimensionError);
    const TtLayer l = matrix_to_tt_layer(w, Vector::Zero(4), {2, 3}, {2, 2});
    EXPECT_THROW((void)tt_layer_forward(l, Vector::Zero(5)), DimensionError);
}

TEST(CompressionReport, PaperScaleFormula) {
    const CompressionReport r = compression_report({32, 32}, {32, 32}, {1, 8, 1});
    EXPECT_EQ(r.tt_weight_params, 16384u);
    EXPECT_EQ(r.dense_weight_params, 1048576u);
    EXPECT_DOUBLE_EQ(r.weight_ratio, 64.0);
    EXPECT_EQ(r.dense_params, 1048576u + 1024u);
    EXPECT_EQ(r.tt_params, 16384u + 1024u);
}

TEST(CompressionReport, MonotoneInInteriorRanks) {
    double prev = std::numeric_limits<double>::infinity();
    for (Index r = 1; r <= 16; ++r) {
        const double ratio = compression_report({4, 4, 4}, {4, 4, 4}, {1, r, 4, 1}).ratio;
        EXPECT_LE(ratio, prev);
        prev = ratio;
    }
}

TEST(CompressionReport, MatchesStoredScalars) {
    std::mt19937_64 rng(8);
    TtLayerOptions o;
    o.max_ranks = {2};
    const TtLayer l = matrix_to_tt_layer(gaussian(12, 18, rng), gaussian(12, 1, rng).col(0), {3, 6}, {3, 4}, o);
    const CompressionReport r = compression_report(l);
    EXPECT_EQ(r.tt_weight_params, stored_scalars(l));
    EXPECT_EQ(r.tt_params, stored_scalars(l) + 12);
}

TEST(TtLayer, ContainerRoundtrip) {
    std::mt19937_64 rng(9);
    const TtLayer l = matrix_to_tt_layer(gaussian(6, 4, rng), gaussian(6, 1, rng).col(0), {2, 2}, {3, 2});
    std::stringstream s;
    write_container(s, to_container(l));
    const ModelContainer c = read_container(s);
    EXPECT_EQ(c.kind, "tt-layer");
    const TtLayer back = tt_layer_from_container(c);
    EXPECT_EQ(back.input_dims, l.input_dims);
    EXPECT_EQ(back.output_dims, l.output_dims);
    EXPECT_EQ(tt_layer_dense_weights(back), tt_layer_dense_weights(l));
    EXPECT_EQ(back.bias, l.bias);
}
