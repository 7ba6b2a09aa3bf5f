#include "multiway/bss.hpp"

#include "multiway/csv.hpp"
#include "multiway/io.hpp"
#include "multiway/linalg.hpp"
#include "multiway/ops.hpp"
#include "multiway/tensorize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace multiway {

namespace {

double relative_residual(const Matrix& x, const Matrix& xhat) {
    const double n = x.norm();
    return n > 0.0 ? (x - xhat).norm() / n : (x - xhat).norm();
}

Matrix center_rows(const Matrix& x, Vector& mean) {
    mean = x.rowwise().mean();
    return x.colwise() - mean;
}

// Frequency (rad/sample) of the largest DFT magnitude of the centered signal.
double dominant_frequency(const Vector& s) {
    const Vector c = s.array() - s.mean();
    constexpr int grid = 4096;
    double best = -1.0, best_w = 0.0;
    for (int g = 0; g <= grid; ++g) {
        const double w = std::numbers::pi * g / grid;
        double re = 0.0, im = 0.0;
        for (Eigen::Index t = 0; t < c.size(); ++t) {
            re += c[t] * std::cos(w * static_cast<double>(t));
            im -= c[t] * std::sin(w * static_cast<double>(t));
        }
        const double p = re * re + im * im;
        if (p > best) {
            best = p;
            best_w = w;
        }
    }
    return best_w;
}

double excess_kurtosis(const Vector& s) {
    const double m2 = central_moments(s, 2);
    if (!(m2 > 0.0)) return 0.0;
    return central_moments(s, 4) / (m2 * m2) - 3.0;
}

}  // namespace

double BssResult::mean_correlation() const {
    if (correlations.empty()) return 0.0;
    return std::accumulate(correlations.begin(), correlations.end(), 0.0) / static_cast<double>(correlations.size());
}

BssScenario generate_scenario(const ScenarioSpec& spec) {
    const Index K = spec.sources, C = spec.channels, T = spec.samples;
    if (K < 1 || T < 2) throw DimensionError("generate_scenario: need K >= 1 sources and T >= 2 samples");
    if (C < K) throw DimensionError("generate_scenario: channels (" + std::to_string(C) + ") < sources (" +
                                    std::to_string(K) + ")");
    if (spec.frequencies.size() != K)
        throw DimensionError("generate_scenario: need one frequency per source");
    for (std::size_t a = 0; a < K; ++a) {
        if (!(spec.frequencies[a] > 0.0)) throw DimensionError("generate_scenario: frequencies must be positive");
        for (std::size_t b = a + 1; b < K; ++b)
            if (spec.frequencies[a] == spec.frequencies[b]) throw DimensionError("generate_scenario: frequencies must be distinct");
    }
    if (!spec.kinds.empty() && spec.kinds.size() != K) throw DimensionError("generate_scenario: need one kind per source");
    if (spec.noise < 0.0) throw DimensionError("generate_scenario: noise must be >= 0");

    auto rng = detail::make_rng(spec.seed, 0);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
    BssScenario s;
    s.seed = spec.seed;
    s.noise = spec.noise;
    s.sources.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(T));
    for (Index k = 0; k < K; ++k) {
        const double phase = phase_dist(rng);
        const bool damped = !spec.kinds.empty() && spec.kinds[k] == SourceKind::DampedExponential;
        for (Index t = 0; t < T; ++t) {
            const double tt = static_cast<double>(t);
            double v = std::sin(spec.frequencies[k] * tt + phase);
            if (damped) v *= std::exp(-spec.damping * tt);
            s.sources(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = v;
        }
        auto row = s.sources.row(static_cast<Eigen::Index>(k));
        row /= std::sqrt(row.squaredNorm() / static_cast<double>(T));
    }
    for (int attempt = 0;; ++attempt) {
        s.mixing = detail::gaussian_matrix(C, K, rng);
        const SvdResult d = svd(s.mixing);
        if (d.S[d.S.size() - 1] > 1e-8 * d.S[0]) break;
        if (attempt > 100) throw NumericalError("generate_scenario: could not draw a full-rank mixing matrix");
    }
    s.mixtures = s.mixing * s.sources;
    if (spec.noise > 0.0) s.mixtures += spec.noise * detail::gaussian_matrix(C, T, rng);
    return s;
}

BssResult bss_pca(const Matrix& x, Index sources) {
    if (sources < 1 || sources > static_cast<Index>(x.rows()))
        throw DimensionError("bss_pca: source count must be in 1..channels");
    const PcaResult p = pca(x.transpose(), sources);
    BssResult r;
    r.method = "pca";
    r.estimated = p.projected.transpose();
    r.reconstruction = (p.components * p.projected.transpose()).colwise() + p.mean;
    r.residual = relative_residual(x, r.reconstruction);
    return r;
}

BssResult bss_fastica(const Matrix& x, Index sources, const FastIcaOptions& opts) {
    if (sources < 1 || sources > static_cast<Index>(x.rows()))
        throw DimensionError("bss_fastica: source count must be in 1..channels");
    const auto K = static_cast<Eigen::Index>(sources);
    const auto T = static_cast<double>(x.cols());
    Vector mean;
    const Matrix xc = center_rows(x, mean);
    Matrix cov = xc * xc.transpose() / T;
    cov = 0.5 * (cov + cov.transpose());
    const EigResult eig = eigh_sym(cov);
    const Matrix e = eig.eigenvectors.leftCols(K);
    const Vector dvals = eig.eigenvalues.head(K);
    if (!(dvals.minCoeff() > 0.0)) throw NumericalError("bss_fastica: mixture covariance is rank deficient");
    const Matrix whiten = dvals.cwiseSqrt().cwiseInverse().asDiagonal() * e.transpose();
    const Matrix z = whiten * xc;

    auto decorrelate = [](const Matrix& w) {
        const EigResult s = eigh_sym(0.5 * (w * w.transpose() + (w * w.transpose()).transpose()));
        const Matrix inv_sqrt = s.eigenvectors * s.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
                                s.eigenvectors.transpose();
        return Matrix(inv_sqrt * w);
    };

    auto rng = detail::make_rng(opts.seed, 1);
    Matrix w = decorrelate(detail::gaussian_matrix(sources, sources, rng));
    BssResult r;
    r.method = "fastica";
    r.converged = false;
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        const Matrix wz = w * z;
        const Matrix g = wz.array().tanh().matrix();
        const Vector gprime_mean = (1.0 - g.array().square()).rowwise().mean();
        Matrix w_new = g * z.transpose() / T - gprime_mean.asDiagonal() * w;
        w_new = decorrelate(w_new);
        const double lim = ((w_new * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
        w = std::move(w_new);
        if (lim < opts.tol) {
            r.converged = true;
            break;
        }
    }
    if (!r.converged) r.note = "fixed-point iteration did not converge within " + std::to_string(opts.max_iters) + " iterations";
    r.estimated = w * z;
    const Matrix a = e * dvals.cwiseSqrt().asDiagonal() * w.transpose();
    r.reconstruction = (a * r.estimated).colwise() + mean;
    r.residual = relative_residual(x, r.reconstruction);

    // near-Gaussian estimates carry no separating signal
    const double threshold = 3.0 * std::sqrt(24.0 / T);
    for (Eigen::Index k = 0; k < K; ++k) {
        if (std::abs(excess_kurtosis(r.estimated.row(k).transpose())) < threshold) {
            r.reliable = false;
            if (!r.note.empty()) r.note += "; ";
            r.note += "estimate " + std::to_string(k + 1) + " is near-Gaussian, separation unreliable";
        }
    }
    return r;
}

BssResult bss_multiway(const Matrix& x, Index sources, const MultiwayOptions& opts) {
    const auto T = static_cast<Index>(x.cols());
    const Index L = opts.window == 0 ? T / 2 : opts.window;
    if (L < 1 || L > T) throw DimensionError("bss_multiway: window out of range");
    const Index J = T - L + 1;
    if (sources < 1 || sources > std::min(L, J)) throw DimensionError("bss_multiway: source count must be <= min(L, T-L+1)");
    const Index R = opts.rank == 0 ? 2 * sources : opts.rank;
    if (R < sources) throw DimensionError("bss_multiway: CP rank must be >= source count");

    const Tensor h = hankelize_channels(x, L);
    const CpFit fit = cp_als(h, R, opts.cp);
    const CpModel& m = fit.model;

    // per-component signal and frequency
    const auto Re = static_cast<Eigen::Index>(R);
    std::vector<Vector> signals;
    std::vector<double> freq;
    for (Eigen::Index r = 0; r < Re; ++r) {
        const Matrix slice = m.weights[r] * m.factors[0].col(r) * m.factors[1].col(r).transpose();
        signals.push_back(dehankelize(slice));
        freq.push_back(dominant_frequency(signals.back()));
    }

    // K frequency groups: cut the sorted frequencies at the K-1 widest gaps
    std::vector<Eigen::Index> order(static_cast<std::size_t>(Re));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return freq[static_cast<std::size_t>(a)] < freq[static_cast<std::size_t>(b)]; });
    std::vector<std::size_t> gaps(order.size() - 1);
    std::iota(gaps.begin(), gaps.end(), std::size_t{0});
    std::stable_sort(gaps.begin(), gaps.end(), [&](auto a, auto b) {
        return freq[static_cast<std::size_t>(order[a + 1])] - freq[static_cast<std::size_t>(order[a])] >
               freq[static_cast<std::size_t>(order[b + 1])] - freq[static_cast<std::size_t>(order[b])];
    });
    std::vector<std::size_t> cuts(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(sources - 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::vector<Eigen::Index>> groups(1);
    for (std::size_t p = 0; p < order.size(); ++p) {
        groups.back().push_back(order[p]);
        if (std::binary_search(cuts.begin(), cuts.end(), p)) groups.emplace_back();
    }

    BssResult res;
    res.method = "multiway";
    res.converged = fit.report.converged;
    if (!res.converged) res.note = "CP-ALS stopped at the iteration cap";
    const auto K = static_cast<Eigen::Index>(sources);
    res.estimated = Matrix::Zero(K, static_cast<Eigen::Index>(T));
    for (Eigen::Index g = 0; g < K; ++g) {
        const auto& members = groups[static_cast<std::size_t>(g)];
        // reference channel signature: the strongest member
        Eigen::Index ref = members.front();
        for (auto r : members)
            if (signals[static_cast<std::size_t>(r)].norm() > signals[static_cast<std::size_t>(ref)].norm()) ref = r;
        const Vector u = m.factors[2].col(ref).normalized();
        for (auto r : members)
            res.estimated.row(g) += m.factors[2].col(r).dot(u) * signals[static_cast<std::size_t>(r)].transpose();
    }
    res.reconstruction = Matrix::Zero(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < Re; ++r)
        res.reconstruction += m.factors[2].col(r) * signals[static_cast<std::size_t>(r)].transpose();
    res.residual = relative_residual(x, res.reconstruction);
    return res;
}

double abs_correlation(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionError("abs_correlation: length mismatch");
    const Vector ac = a.array() - a.mean();
    const Vector bc = b.array() - b.mean();
    const double den = ac.norm() * bc.norm();
    if (!(den > 0.0)) return 0.0;
    return std::min(1.0, std::abs(ac.dot(bc)) / den);
}

Alignment align_sources(const Matrix& truth, const Matrix& estimated) {
    const auto K = static_cast<std::size_t>(truth.rows());
    if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols())
        throw DimensionError("align_sources: estimate shape differs from the truth");
    if (K > 8) throw DimensionError("align_sources: exhaustive alignment supports at most 8 sources");
    Matrix corr(truth.rows(), truth.rows());
    Matrix sign(truth.rows(), truth.rows());
    for (Eigen::Index i = 0; i < truth.rows(); ++i)
        for (Eigen::Index j = 0; j < truth.rows(); ++j) {
            const Vector a = truth.row(i).transpose(), b = estimated.row(j).transpose();
            corr(i, j) = abs_correlation(a, b);
            sign(i, j) = ((a.array() - a.mean()).matrix().dot((b.array() - b.mean()).matrix()) < 0.0) ? -1.0 : 1.0;
        }
    std::vector<Index> perm(K);
    std::iota(perm.begin(), perm.end(), Index{0});
    Alignment best;
    double best_sum = -1.0;
    do {
        double sum = 0.0;
        for (std::size_t i = 0; i < K; ++i) sum += corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
        if (sum > best_sum) {
            best_sum = sum;
            best.assignment = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (std::size_t i = 0; i < K; ++i) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(best.assignment[i]);
        best.correlations.push_back(corr(ii, jj));
        best.signs.push_back(sign(ii, jj));
    }
    return best;
}

void score(BssResult& result, const BssScenario& scenario) {
    const Alignment a = align_sources(scenario.sources, result.estimated);
    result.correlations = a.correlations;
    result.assignment = a.assignment;
    result.signs = a.signs;
}

Comparison compare_methods(const BssScenario& scenario, const std::vector<std::string>& methods,
                           const MultiwayOptions& multiway, const FastIcaOptions& ica) {
    Comparison c;
    c.sources = static_cast<Index>(scenario.sources.rows());
    for (const auto& name : methods) {
        BssResult r;
        try {
            if (name == "pca")
                r = bss_pca(scenario.mixtures, c.sources);
            else if (name == "fastica" || name == "ica")
                r = bss_fastica(scenario.mixtures, c.sources, ica);
            else if (name == "multiway")
                r = bss_multiway(scenario.mixtures, c.sources, multiway);
            else
                throw DimensionError("unknown method '" + name + "'");
            score(r, scenario);
        } catch (const Error& e) {
            r = BssResult{};
            r.method = name;
            r.converged = false;
            r.reliable = false;
            r.residual = std::numeric_limits<double>::quiet_NaN();
            r.note = std::string("failed: ") + e.what();
        }
        c.results.push_back(std::move(r));
    }
    return c;
}

void write_comparison_csv(std::ostream& os, const Comparison& c) {
    os << "method,residual,mean_abs_corr";
    for (Index k = 0; k < c.sources; ++k) os << ",corr_" << (k + 1);
    os << ",converged,reliable,note\n";
    for (const auto& r : c.results) {
        os << r.method << ',' << format_scalar(r.residual) << ',' << format_scalar(r.mean_correlation());
        for (Index k = 0; k < c.sources; ++k)
            os << ',' << (k < r.correlations.size() ? format_scalar(r.correlations[k]) : std::string("nan"));
        os << ',' << (r.converged ? "true" : "false") << ',' << (r.reliable ? "true" : "false") << ','
           << csv_escape(r.note) << '\n';
    }
}

void write_signals_csv(std::ostream& os, const BssScenario& s, const Comparison& c) {
    const Eigen::Index K = s.sources.rows(), C = s.mixtures.rows(), T = s.sources.cols();
    os << "time";
    for (Eigen::Index k = 0; k < K; ++k) os << ",original_" << (k + 1);
    for (Eigen::Index ch = 0; ch < C; ++ch) os << ",mixed_" << (ch + 1);
    std::vector<Matrix> aligned;
    for (const auto& r : c.results) {
        if (r.assignment.empty()) continue;
        Matrix est(K, T);
        for (Eigen::Index k = 0; k < K; ++k) {
            const Vector e = r.estimated.row(static_cast<Eigen::Index>(r.assignment[static_cast<std::size_t>(k)])).transpose();
            const Vector ec = e.array() - e.mean();
            const Vector src = s.sources.row(k).transpose();
            const double scale = ec.squaredNorm() > 0.0 ? ec.dot(src.array().matrix() - Vector::Constant(T, src.mean())) / ec.squaredNorm() : 0.0;
            est.row(k) = (scale * ec).transpose().array() + src.mean();
        }
        aligned.push_back(std::move(est));
        for (Eigen::Index k = 0; k < K; ++k) os << ',' << r.method << "_estimate_" << (k + 1);
    }
    os << '\n';
    for (Eigen::Index t = 0; t < T; ++t) {
        os << t;
        for (Eigen::Index k = 0; k < K; ++k) os << ',' << format_scalar(s.sources(k, t));
        for (Eigen::Index ch = 0; ch < C; ++ch) os << ',' << format_scalar(s.mixtures(ch, t));
        for (const auto& est : aligned)
            for (Eigen::Index k = 0; k < K; ++k) os << ',' << format_scalar(est(k, t));
        os << '\n';
    }
}

}  // namespace multiway
