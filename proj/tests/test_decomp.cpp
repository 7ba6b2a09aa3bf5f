#include "multiway/decomp.hpp"
#include "multiway/error.hpp"
#include "multiway/model_io.hpp"
#include "multiway/ops.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace multiway;
using testing_support::brute_cp;
using testing_support::gaussian;
using testing_support::max_abs_diff;
using testing_support::random_tensor;

namespace {

bool nonincreasing(const std::vector<double>& e) {
    for (std::size_t i = 1; i < e.size(); ++i)
        if (e[i] > e[i - 1]) return false;
    return true;
}

double orthonormality_defect(const Matrix& q) {
    return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

Vector unit(Index n, std::mt19937_64& rng) { return gaussian(n, 1, rng).col(0).normalized(); }

}  // namespace

TEST(CpReconstruct, MatchesBruteForceAndDiagonalCore) {
    std::mt19937_64 rng(1);
    CpModel m;
    m.weights = Vector::LinSpaced(3, 3.0, 1.0);
    for (Index d : {3, 4, 2}) m.factors.push_back(gaussian(d, 3, rng));
    const Tensor t = cp_reconstruct(m);
    EXPECT_LT(max_abs_diff(t, brute_cp(m.factors, &m.weights)), 1e-12);
    Tensor viacore = m.diagonal_core();
    for (std::size_t n = 0; n < 3; ++n) viacore = mode_n_product(viacore, m.factors[n], n + 1);
    EXPECT_LT(max_abs_diff(t, viacore), 1e-12);
}

TEST(CpReconstruct, RankOneIsScaledOuterProduct) {
    std::mt19937_64 rng(2);
    const Vector a = unit(3, rng), b = unit(4, rng);
    CpModel m;
    m.weights = Vector::Constant(1, 2.0);
    m.factors = {Matrix(a), Matrix(b)};
    EXPECT_LT(max_abs_diff(cp_reconstruct(m), outer_product<double>({a, b}) * 2.0), 1e-14);
}

TEST(CpAls, ExactRankOne) {
    std::mt19937_64 rng(3);
    const Vector a = unit(4, rng), b = unit(5, rng), c = unit(3, rng);
    const Tensor t = outer_product<double>({a, b, c}) * 5.0;
    const CpFit fit = cp_als(t, 1);
    EXPECT_NEAR(fit.model.weights[0], 5.0, 1e-10);
    EXPECT_GT(std::abs(fit.model.factors[0].col(0).dot(a)), 1 - 1e-8);
    EXPECT_GT(std::abs(fit.model.factors[1].col(0).dot(b)), 1 - 1e-8);
    EXPECT_GT(std::abs(fit.model.factors[2].col(0).dot(c)), 1 - 1e-8);
    EXPECT_NO_THROW(fit.model.validate());
}

TEST(CpAls, ExactRankThreeWithinTwoHundredIterations) {
    std::mt19937_64 rng(4);
    const Tensor t = brute_cp({gaussian(10, 3, rng), gaussian(10, 3, rng), gaussian(10, 3, rng)});
    CpOptions o;
    o.max_iters = 200;
    o.tol = 1e-14;
    const CpFit fit = cp_als(t, 3, o);
    EXPECT_LT(relative_error(t, cp_reconstruct(fit.model)), 1e-6);
    EXPECT_LE(fit.report.iterations, 200u);
    EXPECT_TRUE(nonincreasing(fit.report.errors));
    EXPECT_NEAR(fit.report.final_error(), relative_error(t, cp_reconstruct(fit.model)), 1e-12);
}

TEST(CpAls, ErrorsNonincreasingOnRandomTensor) {
    std::mt19937_64 rng(5);
    const Tensor t = random_tensor(Shape({4, 4, 4}), rng);
    const CpFit fit = cp_als(t, 2);
    EXPECT_TRUE(nonincreasing(fit.report.errors));
    for (double e : fit.report.errors) EXPECT_LE(fit.report.final_error(), e);
}

TEST(CpAls, HosvdInitAndDeterminism) {
    std::mt19937_64 rng(6);
    const Tensor t = brute_cp({gaussian(5, 2, rng), gaussian(6, 2, rng), gaussian(4, 2, rng)});
    CpOptions o;
    o.init = CpInit::Hosvd;
    EXPECT_LT(cp_als(t, 2, o).report.final_error(), 1e-6);
    const CpFit a = cp_als(t, 2), b = cp_als(t, 2);
    EXPECT_EQ(a.model.weights, b.model.weights);
    EXPECT_EQ(a.report.errors, b.report.errors);
}

TEST(CpAls, InvalidArguments) {
    EXPECT_THROW((void)cp_als(Tensor(Shape({2, 2})), 0), DimensionError);
    EXPECT_THROW((void)cp_als(Tensor(Shape({2, 2})), 1), NumericalError);  // zero tensor
}

TEST(CpAls, IterationCapReportsNotConverged) {
    std::mt19937_64 rng(7);
    const Tensor t = random_tensor(Shape({5, 5, 5}), rng);
    CpOptions o;
    o.max_iters = 3;
    o.tol = 0.0;
    o.restarts = 1;
    const CpFit fit = cp_als(t, 3, o);
    EXPECT_FALSE(fit.report.converged);
    EXPECT_EQ(fit.report.iterations, 3u);
}

TEST(Canonicalize, OrdersAndNormalizes) {
    CpModel m;
    m.weights = Vector::Ones(2);
    Matrix a(2, 2), b(2, 2);
    a << 1, -3, 0, 0;
    b << 2, 1, 0, 1;
    m.factors = {a, b};
    const Tensor before = cp_reconstruct(m);
    canonicalize(m);
    EXPECT_NO_THROW(m.validate());
    EXPECT_GE(m.weights[0], m.weights[1]);
    EXPECT_LT(max_abs_diff(before, cp_reconstruct(m)), 1e-14);
}

TEST(Hosvd, FullRankExactAndOrthonormal) {
    std::mt19937_64 rng(8);
    const Tensor t = random_tensor(Shape({3, 4, 5}), rng);
    const TuckerModel m = hosvd(t, {3, 4, 5});
    EXPECT_LT(relative_error(t, tucker_reconstruct(m)), 1e-10);
    for (const auto& f : m.factors) EXPECT_LT(orthonormality_defect(f), 1e-10);
}

TEST(Hosvd, EmbeddedMultilinearRank) {
    std::mt19937_64 rng(9);
    Tensor t = random_tensor(Shape({2, 2, 2}), rng);
    for (std::size_t n = 1; n <= 3; ++n) t = mode_n_product(t, gaussian(5, 2, rng), n);
    const TuckerModel m = hosvd(t, {2, 2, 2});
    EXPECT_LT(relative_error(t, tucker_reconstruct(m)), 1e-10);
    const TuckerFit h = hooi(t, {2, 2, 2});
    EXPECT_LT(relative_error(t, tucker_reconstruct(h.model)), 1e-10);
    EXPECT_THROW((void)hosvd(t, {6, 2, 2}), DimensionError);
    EXPECT_THROW((void)hosvd(t, {2, 2}), DimensionError);
}

TEST(Hooi, NeverWorseThanHosvd) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(100 + seed);
        const Tensor t = random_tensor(Shape({6, 6, 6}), rng);
        const double start = relative_error(t, tucker_reconstruct(hosvd(t, {2, 2, 2})));
        const TuckerFit h = hooi(t, {2, 2, 2});
        EXPECT_LE(relative_error(t, tucker_reconstruct(h.model)), start);
        EXPECT_NEAR(h.report.final_error(), relative_error(t, tucker_reconstruct(h.model)), 1e-12);
        for (const auto& f : h.model.factors) EXPECT_LT(orthonormality_defect(f), 1e-10);
    }
}

TEST(Hooi, OneFullRankSweepMatchesHosvd) {
    std::mt19937_64 rng(11);
    const Tensor t = random_tensor(Shape({3, 4, 3}), rng);
    TuckerOptions o;
    o.max_iters = 1;
    const Tensor a = tucker_reconstruct(hooi(t, {3, 4, 3}, o).model);
    EXPECT_LT(max_abs_diff(a, tucker_reconstruct(hosvd(t, {3, 4, 3}))), 1e-10);
}

TEST(TtSvd, RankOne) {
    std::mt19937_64 rng(12);
    const Tensor t = outer_product<double>({unit(3, rng), unit(4, rng), unit(2, rng), unit(3, rng)}) * 3.0;
    const TtFit fit = tt_svd(t);
    EXPECT_EQ(fit.model.ranks(), (std::vector<Index>{1, 1, 1, 1, 1}));
    EXPECT_LT(relative_error(t, tt_reconstruct(fit.model)), 1e-12);
}

TEST(TtSvd, FullRankRoundtrip) {
    std::mt19937_64 rng(13);
    const Tensor t = random_tensor(Shape({4, 4, 4, 4}), rng);
    const TtFit fit = tt_svd(t);
    EXPECT_LT(relative_error(t, tt_reconstruct(fit.model)), 1e-10);
    EXPECT_EQ(fit.model.ranks(), (std::vector<Index>{1, 4, 16, 4, 1}));
    EXPECT_NO_THROW(fit.model.validate());
}

TEST(TtSvd, TruncationBound) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        std::mt19937_64 rng(200 + seed);
        const Tensor t = random_tensor(Shape({3, 4, 3, 4}), rng);
        TtOptions o;
        o.max_ranks = {2};
        const TtFit fit = tt_svd(t, o);
        double b2 = 0.0;
        for (double e : fit.discarded) b2 += e * e;
        const double actual = frobenius_norm(t - tt_reconstruct(fit.model));
        EXPECT_LE(actual, std::sqrt(b2) + 1e-12 * frobenius_norm(t));
        for (Index r : fit.model.ranks()) EXPECT_LE(r, 2u);
    }
}

TEST(TtSvd, ToleranceControlsAccuracy) {
    std::mt19937_64 rng(14);
    const Tensor t = random_tensor(Shape({4, 3, 5, 2}), rng);
    for (double tol : {0.05, 0.2, 0.5}) {
        TtOptions o;
        o.tol = tol;
        const TtFit fit = tt_svd(t, o);
        EXPECT_LE(relative_error(t, tt_reconstruct(fit.model)), tol * (1 + 1e-12));
    }
    TtOptions bad;
    bad.max_ranks = {1, 2};
    EXPECT_THROW((void)tt_svd(t, bad), DimensionError);
}

TEST(TtSvd, OneAndTwoWay) {
    std::mt19937_64 rng(15);
    const Tensor v = random_tensor(Shape({5}), rng);
    EXPECT_LT(relative_error(v, tt_reconstruct(tt_svd(v).model)), 1e-14);
    const Tensor m = random_tensor(Shape({4, 6}), rng);
    EXPECT_LT(relative_error(m, tt_reconstruct(tt_svd(m).model)), 1e-12);
}

TEST(RelativeError, Anchors) {
    std::mt19937_64 rng(16);
    const Tensor t = random_tensor(Shape({3, 3}), rng);
    EXPECT_EQ(relative_error(t, t), 0.0);
    EXPECT_EQ(relative_error(t, Tensor(t.shape())), 1.0);
    EXPECT_THROW((void)relative_error(Tensor(t.shape()), t), NumericalError);
    EXPECT_THROW((void)relative_error(t, Tensor(Shape({9}))), DimensionError);
}

TEST(RankSweep, ExactRankThree) {
    std::mt19937_64 rng(17);
    const Tensor t = brute_cp({gaussian(6, 3, rng), gaussian(6, 3, rng), gaussian(6, 3, rng)});
    const auto pts = rank_sweep(t, {1, 2, 3});
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_GT(pts[0].error, 0.1);
    EXPECT_LT(pts[2].error, 1e-6);
}

TEST(Containers, TuckerAndTtRoundtrip) {
    std::mt19937_64 rng(18);
    const Tensor t = random_tensor(Shape({3, 4, 2}), rng);
    const TuckerModel tm = hosvd(t, {2, 2, 2});
    std::stringstream s1;
    write_container(s1, to_container(tm));
    const TuckerModel tb = tucker_from_container(read_container(s1));
    EXPECT_EQ(tucker_reconstruct(tb), tucker_reconstruct(tm));
    const TtModel tt = tt_svd(t).model;
    std::stringstream s2;
    write_container(s2, to_container(tt));
    EXPECT_EQ(tt_reconstruct(tt_from_container(read_container(s2))), tt_reconstruct(tt));
}
