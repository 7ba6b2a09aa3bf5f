// multiway: batch front end for tensorization, decomposition and the experiment harnesses.
//
// Exit status: 0 success, 2 usage error, 3 data or validation error,
// 4 numerical failure (non-convergence; reports are still written).

#include "multiway/bss.hpp"
#include "multiway/compress.hpp"
#include "multiway/csv.hpp"
#include "multiway/decomp.hpp"
#include "multiway/error.hpp"
#include "multiway/io.hpp"
#include "multiway/learn.hpp"
#include "multiway/model_io.hpp"
#include "multiway/ops.hpp"
#include "multiway/tensorize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace multiway;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct UsageError : Error {
    using Error::Error;
};

/// Files of one run, written together once every computation has succeeded.
class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

    bool enabled() const { return !dir_.empty(); }
    void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
    void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }

    void commit() const {
        if (!enabled()) return;
        fs::create_directories(dir_);
        for (const auto& [name, content] : files_) write_text_atomic(fs::path(dir_) / name, content);
    }

private:
    std::string dir_;
    std::map<std::string, std::string> files_;
};

template <class F>
std::string render(F&& f) {
    std::ostringstream os;
    f(os);
    return os.str();
}

WideSize memory_budget(const std::string& flag) {
    std::string v = flag;
    if (v.empty())
        if (const char* env = std::getenv("MULTIWAY_MEMORY_BUDGET")) v = env;
    if (v.empty()) return kDefaultMemoryBudget;
    const long long b = parse_integer(v);
    if (b <= 0) throw UsageError("memory budget must be a positive byte count");
    return static_cast<WideSize>(b);
}

Tensor read_tensor_dense(const std::string& path, WideSize budget) {
    return sparse_to_dense(read_sparse_file(path), budget);
}

/// Numeric CSV as an observations x columns matrix.
Matrix numeric_csv(const std::string& path, const std::vector<std::string>& columns = {}) {
    const CsvTable t = read_csv_file(path);
    std::vector<std::size_t> idx;
    if (columns.empty()) {
        for (std::size_t c = 0; c < t.header.size(); ++c) idx.push_back(c);
    } else {
        for (const auto& name : columns) idx.push_back(t.column(name));
    }
    if (t.rows.empty()) throw DataError("no data rows", path, 1);
    Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) {
            try {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(t.rows[r][idx[c]]);
            } catch (const Error& e) {
                throw DataError(e.what(), path, t.line_numbers[r]);
            }
        }
    return m;
}

json report_json(const FitReport& r) {
    return json{{"iterations", r.iterations},
                {"converged", r.converged},
                {"final_error", r.final_error()},
                {"errors", r.errors}};
}

std::string container_text(const ModelContainer& c) {
    return render([&](std::ostream& os) { write_container(os, c); });
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------- subcommands

struct Common {
    std::string out;
    std::string budget;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--out", c.out, "output directory");
    app->add_option("--memory-budget", c.budget, "densification limit in bytes (env MULTIWAY_MEMORY_BUDGET)");
}

struct TensorizeArgs {
    Common common;
    std::string input, plan;
};

int run_tensorize(const TensorizeArgs& a, Outputs& out) {
    const CsvTable table = read_csv_file(a.input);
    const TensorizationPlan plan = read_plan_file(a.plan);
    const TensorizedTable t = tensorize_table(table, plan);
    const double size = static_cast<double>(t.tensor.size());
    json report{{"shape", t.tensor.shape().dims()},
                {"modes", t.mode_names},
                {"size", t.tensor.size()},
                {"nnz", t.tensor.nnz()},
                {"cells", t.cells},
                {"density", t.tensor.density()},
                {"cell_density", static_cast<double>(t.cells) / size},
                {"sparsity", 1.0 - t.tensor.density()},
                {"rows_used", t.rows_used},
                {"skipped_rows", t.skipped_rows},
                {"collisions", t.collision_count}};
    out.add("tensor.txt", render([&](std::ostream& os) { write_tensor(os, t.tensor); }));
    out.add("axis_maps.csv", render([&](std::ostream& os) { write_axis_maps(os, t); }));
    out.add_json("density_report.json", report);
    std::cout << "shape " << t.tensor.shape().str() << "  size " << t.tensor.size() << "  nnz " << t.tensor.nnz()
              << "  density " << format_scalar(100.0 * t.tensor.density()) << "%\n";
    return kExitOk;
}

struct DecomposeArgs {
    Common common;
    std::string input, kind = "cp", method = "hooi", init = "random";
    Index rank = 1;
    std::vector<Index> ranks, sweep;
    std::size_t max_iters = 500, restarts = 3;
    double tol = 1e-8, tt_tol = 0.0, ridge = 0.0;
    std::uint64_t seed = 42;
};

int run_decompose(const DecomposeArgs& a, Outputs& out) {
    const Tensor t = read_tensor_dense(a.input, memory_budget(a.common.budget));
    bool converged = true;
    if (a.kind == "cp") {
        CpOptions o;
        o.max_iters = a.max_iters;
        o.tol = a.tol;
        o.seed = a.seed;
        o.restarts = a.restarts;
        o.ridge = a.ridge;
        if (a.init == "hosvd")
            o.init = CpInit::Hosvd;
        else if (a.init != "random")
            throw UsageError("--init must be random or hosvd");
        if (!a.sweep.empty()) {
            const auto pts = rank_sweep(t, a.sweep, o);
            json j = json::array();
            std::string csv = "rank,error\n";
            for (const auto& p : pts) {
                j.push_back({{"rank", p.rank}, {"error", p.error}});
                csv += std::to_string(p.rank) + "," + format_scalar(p.error) + "\n";
                std::cout << "rank " << p.rank << "  error " << format_scalar(p.error) << "\n";
            }
            out.add("rank_sweep.csv", csv);
            out.add_json("rank_sweep.json", j);
            return kExitOk;
        }
        const CpFit fit = cp_als(t, a.rank, o);
        out.add("model.txt", container_text(to_container(fit.model)));
        out.add_json("fit_report.json", report_json(fit.report));
        converged = fit.report.converged;
        std::cout << "cp rank " << a.rank << "  error " << format_scalar(fit.report.final_error()) << "  iterations "
                  << fit.report.iterations << "\n";
    } else if (a.kind == "tucker") {
        if (a.ranks.size() != t.order()) throw UsageError("--ranks needs one rank per mode");
        if (a.method == "hosvd") {
            const TuckerModel m = hosvd(t, a.ranks);
            FitReport r;
            r.errors.push_back(relative_error(t, tucker_reconstruct(m)));
            r.iterations = 0;
            r.converged = true;
            out.add("model.txt", container_text(to_container(m)));
            out.add_json("fit_report.json", report_json(r));
            std::cout << "hosvd error " << format_scalar(r.final_error()) << "\n";
        } else if (a.method == "hooi") {
            TuckerOptions o;
            o.max_iters = a.max_iters;
            o.tol = a.tol;
            const TuckerFit fit = hooi(t, a.ranks, o);
            out.add("model.txt", container_text(to_container(fit.model)));
            out.add_json("fit_report.json", report_json(fit.report));
            converged = fit.report.converged;
            std::cout << "hooi error " << format_scalar(fit.report.final_error()) << "  iterations "
                      << fit.report.iterations << "\n";
        } else {
            throw UsageError("--method must be hosvd or hooi");
        }
    } else if (a.kind == "tt") {
        TtOptions o;
        o.max_ranks = a.ranks;
        o.tol = a.tt_tol;
        const TtFit fit = tt_svd(t, o);
        json r = report_json(fit.report);
        r["ranks"] = fit.model.ranks();
        r["discarded"] = fit.discarded;
        out.add("model.txt", container_text(to_container(fit.model)));
        out.add_json("fit_report.json", r);
        std::cout << "tt ranks " << join_indices(fit.model.ranks()) << "  error "
                  << format_scalar(fit.report.final_error()) << "\n";
    } else {
        throw UsageError("--kind must be cp, tucker or tt");
    }
    if (!converged) {
        std::cerr << "warning: iteration cap reached before convergence\n";
        return kExitNumerical;
    }
    return kExitOk;
}

struct RegressArgs {
    Common common;
    std::string samples, kind = "cp", file_column = "file", response = "y";
    Index rank = 1;
    std::vector<Index> ranks;
    double lambda = 1e-6;
    std::size_t max_iters = 500, restarts = 1;
    double tol = 1e-10;
    std::uint64_t seed = 42;
    bool no_intercept = false;
};

int run_regress(const RegressArgs& a, Outputs& out) {
    const CsvTable table = read_csv_file(a.samples);
    const std::size_t fcol = table.column(a.file_column), ycol = table.column(a.response);
    std::vector<std::size_t> zcols;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (c != fcol && c != ycol) zcols.push_back(c);
    const fs::path base = fs::path(a.samples).parent_path();
    const WideSize budget = memory_budget(a.common.budget);
    std::vector<RegressionSample> samples;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        RegressionSample s;
        try {
            s.x = read_tensor_dense((base / row[fcol]).string(), budget);
            s.y = parse_double(row[ycol]);
            s.z.resize(static_cast<Eigen::Index>(zcols.size()));
            for (std::size_t k = 0; k < zcols.size(); ++k) s.z[static_cast<Eigen::Index>(k)] = parse_double(row[zcols[k]]);
        } catch (const DataError&) {
            throw;
        } catch (const Error& e) {
            throw DataError(e.what(), a.samples, table.line_numbers[r]);
        }
        samples.push_back(std::move(s));
    }
    RegressionOptions o;
    o.max_iters = a.max_iters;
    o.tol = a.tol;
    o.seed = a.seed;
    o.restarts = a.restarts;
    o.intercept = !a.no_intercept;

    Tensor coef;
    json model;
    FitReport report;
    std::function<double(const RegressionSample&)> predict;
    if (a.kind == "cp") {
        auto fit = cp_regression_fit(samples, a.rank, a.lambda, o);
        coef = fit.model.coefficient();
        model = {{"kind", "cp"}, {"rank", a.rank}, {"intercept", fit.model.intercept},
                 {"weights", to_std(fit.model.weights)}, {"residual_scale", fit.model.residual_scale}};
        report = fit.report;
        predict = [m = fit.model](const RegressionSample& s) { return regress_predict(m, s.x, s.z); };
    } else if (a.kind == "tucker") {
        auto fit = tucker_regression_fit(samples, a.ranks, a.lambda, o);
        coef = fit.model.coefficient();
        model = {{"kind", "tucker"}, {"ranks", a.ranks}, {"intercept", fit.model.intercept},
                 {"weights", to_std(fit.model.weights)}, {"residual_scale", fit.model.residual_scale}};
        report = fit.report;
        predict = [m = fit.model](const RegressionSample& s) { return regress_predict(m, s.x, s.z); };
    } else {
        throw UsageError("--kind must be cp or tucker");
    }
    std::string pred = "sample,y,prediction\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
        pred += std::to_string(i + 1) + "," + format_scalar(samples[i].y) + "," + format_scalar(predict(samples[i])) + "\n";
    out.add("coefficient.txt", render([&](std::ostream& os) { write_tensor(os, coef); }));
    out.add_json("model.json", model);
    out.add_json("fit_report.json", report_json(report));
    out.add("predictions.csv", pred);
    std::cout << a.kind << " regression on " << samples.size() << " samples  objective "
              << format_scalar(report.final_error()) << "\n";
    if (!report.converged) {
        std::cerr << "warning: iteration cap reached before convergence\n";
        return kExitNumerical;
    }
    return kExitOk;
}

struct CompleteArgs {
    Common common;
    std::string input, mask;
    Index rank = 1;
    std::size_t max_iters = 500, restarts = 3;
    double tol = 1e-10;
    std::uint64_t seed = 42;
};

int run_complete(const CompleteArgs& a, Outputs& out) {
    const Sparse observed = read_sparse_file(a.input);
    Sparse indicators(observed.shape());
    if (a.mask.empty()) {
        for (const auto& [off, v] : observed) indicators.set_offset(off, 1.0);
    } else {
        indicators = read_sparse_file(a.mask);
    }
    const ObservationMask mask(std::move(indicators));
    CpOptions o;
    o.max_iters = a.max_iters;
    o.tol = a.tol;
    o.seed = a.seed;
    o.restarts = a.restarts;
    const WideSize budget = memory_budget(a.common.budget);
    if (observed.size() > budget / sizeof(double)) throw BudgetError("completed tensor exceeds the memory budget");
    const CpFit fit = cp_complete(observed, mask, a.rank, o);
    const Tensor filled = fill_completed(observed, mask, fit.model);
    out.add("model.txt", container_text(to_container(fit.model)));
    out.add("completed.txt", render([&](std::ostream& os) { write_tensor(os, filled); }));
    json r = report_json(fit.report);
    r["observed"] = mask.observed_count();
    r["size"] = observed.size();
    out.add_json("fit_report.json", r);
    std::cout << "completion rank " << a.rank << "  observed error " << format_scalar(fit.report.final_error())
              << "\n";
    if (!fit.report.converged) {
        std::cerr << "warning: iteration cap reached before convergence\n";
        return kExitNumerical;
    }
    return kExitOk;
}

struct HankelizeArgs {
    Common common;
    std::string input;
    std::vector<std::string> columns;
    Index window = 0;
};

int run_hankelize(const HankelizeArgs& a, Outputs& out) {
    const Matrix x = numeric_csv(a.input, a.columns).transpose();  // channels x samples
    const Index T = static_cast<Index>(x.cols());
    const Index L = a.window == 0 ? T / 2 : a.window;
    Tensor h = x.rows() == 1 ? from_matrix(hankelize(x.row(0).transpose(), L)) : hankelize_channels(x, L);
    out.add("hankel.txt", render([&](std::ostream& os) { write_tensor(os, h); }));
    std::cout << "hankel tensor " << h.shape().str() << "\n";
    return kExitOk;
}

struct StatsArgs {
    Common common;
    std::string input;
    bool norms = false;
    int moments = 0, cumulant = 0;
    std::vector<Index> lags;
};

int run_stats(const StatsArgs& a, Outputs& out) {
    const Matrix m = numeric_csv(a.input);
    if (!a.norms && a.moments == 0 && a.cumulant == 0 && a.lags.empty())
        throw UsageError("choose at least one of --norms, --moments, --cumulant, --lags");
    json j;
    if (a.norms) {
        const Matrix rm = m.transpose();  // row-major flattening of the table
        const Vector v = Eigen::Map<const Vector>(rm.data(), rm.size());
        const double l1 = vector_norm(v, NormKind::L1), l2 = vector_norm(v, NormKind::L2),
                     inf = vector_norm(v, NormKind::Inf);
        std::cout << "l1 " << format_scalar(l1) << "\nl2 " << format_scalar(l2) << "\ninf " << format_scalar(inf)
                  << "\n";
        j["norms"] = {{"l1", l1}, {"l2", l2}, {"inf", inf}};
    }
    if (a.moments > 0) {
        json cols = json::object();
        std::string csv = "order";
        for (const auto& name : read_csv_file(a.input).header) csv += "," + csv_escape(name);
        csv += "\n";
        for (int k = 1; k <= a.moments; ++k) {
            csv += std::to_string(k);
            for (Eigen::Index c = 0; c < m.cols(); ++c) csv += "," + format_scalar(central_moments(m.col(c), k));
            csv += "\n";
        }
        std::cout << csv;
        out.add("moments.csv", csv);
    }
    if (a.cumulant != 0) {
        if (a.cumulant != 3 && a.cumulant != 4) throw UsageError("--cumulant must be 3 or 4");
        const Tensor c = cumulant_tensor(m, a.cumulant);
        out.add("cumulant.txt", render([&](std::ostream& os) { write_tensor(os, c); }));
        std::cout << "cumulant tensor " << c.shape().str() << "  norm " << format_scalar(frobenius_norm(c)) << "\n";
        j["cumulant_norm"] = frobenius_norm(c);
    }
    if (!a.lags.empty()) {
        const Tensor c = lagged_covariance(m.transpose(), a.lags);
        out.add("lagged_covariance.txt", render([&](std::ostream& os) { write_tensor(os, c); }));
        std::cout << "lagged covariance tensor " << c.shape().str() << "\n";
    }
    if (!j.is_null()) out.add_json("stats.json", j);
    return kExitOk;
}

struct CompressArgs {
    Common common;
    std::string weights, bias;
    std::vector<Index> input_dims, output_dims, max_ranks;
    double tol = 0.0;
};

int run_tt_compress(const CompressArgs& a, Outputs& out) {
    const WideSize budget = memory_budget(a.common.budget);
    const Matrix w = to_matrix(read_tensor_dense(a.weights, budget));
    Vector b = Vector::Zero(w.rows());
    if (!a.bias.empty()) {
        const Tensor bt = read_tensor_dense(a.bias, budget);
        b = bt.vec();
    }
    TtLayerOptions o;
    o.max_ranks = a.max_ranks;
    o.tol = a.tol;
    const TtLayer layer = matrix_to_tt_layer(w, b, a.input_dims, a.output_dims, o);
    const CompressionReport r = compression_report(layer);
    const double err = (tt_layer_dense_weights(layer) - w).norm() / std::max(w.norm(), 1e-300);
    json j{{"ranks", layer.ranks()},
           {"dense_params", r.dense_params},
           {"tt_params", r.tt_params},
           {"dense_weight_params", r.dense_weight_params},
           {"tt_weight_params", r.tt_weight_params},
           {"ratio", r.ratio},
           {"weight_ratio", r.weight_ratio},
           {"weight_relative_error", err}};
    out.add("layer.txt", container_text(to_container(layer)));
    out.add_json("compression_report.json", j);
    std::cout << "tt ranks " << join_indices(layer.ranks()) << "  weights " << r.dense_weight_params << " -> "
              << r.tt_weight_params << "  ratio " << format_scalar(r.weight_ratio) << "\n";
    return kExitOk;
}

struct BssArgs {
    Common common;
    Index sources = 2, channels = 3, samples = 400, window = 0, rank = 0;
    std::vector<double> freqs{0.3, 0.8};
    std::vector<std::string> methods{"pca", "fastica", "multiway"};
    std::string kind = "sinusoid";
    double noise = 0.0, damping = 0.005;
    std::uint64_t seed = 42;
};

int run_bss(const BssArgs& a, Outputs& out) {
    ScenarioSpec spec;
    spec.sources = a.sources;
    spec.channels = a.channels;
    spec.samples = a.samples;
    spec.frequencies = a.freqs;
    spec.noise = a.noise;
    spec.damping = a.damping;
    spec.seed = a.seed;
    if (a.kind == "damped")
        spec.kinds.assign(a.sources, SourceKind::DampedExponential);
    else if (a.kind != "sinusoid")
        throw UsageError("--kind must be sinusoid or damped");
    const BssScenario s = generate_scenario(spec);
    MultiwayOptions mo;
    mo.window = a.window;
    mo.rank = a.rank;
    mo.cp.seed = a.seed;
    FastIcaOptions io;
    io.seed = a.seed;
    const Comparison c = compare_methods(s, a.methods, mo, io);
    const std::string table = render([&](std::ostream& os) { write_comparison_csv(os, c); });
    out.add("comparison.csv", table);
    out.add("signals.csv", render([&](std::ostream& os) { write_signals_csv(os, s, c); }));
    std::cout << table;
    return kExitOk;
}

struct ParamsArgs {
    std::string kind = "cp", mode = "raw";
    std::vector<Index> dims, ranks;
    Index rank = 1, covariates = 0;
};

int run_params(const ParamsArgs& a) {
    ParamModel k;
    if (a.kind == "cp")
        k = ParamModel::Cp;
    else if (a.kind == "tucker")
        k = ParamModel::Tucker;
    else if (a.kind == "vectorized")
        k = ParamModel::Vectorized;
    else
        throw UsageError("--kind must be cp, tucker or vectorized");
    ParamMode m;
    if (a.mode == "raw")
        m = ParamMode::Raw;
    else if (a.mode == "effective")
        m = ParamMode::Effective;
    else
        throw UsageError("--mode must be raw or effective");
    std::vector<Index> ranks = a.ranks;
    if (ranks.empty()) ranks = k == ParamModel::Tucker ? std::vector<Index>(a.dims.size(), a.rank) : std::vector<Index>{a.rank};
    std::cout << param_count(k, a.dims, ranks, a.covariates, m) << "\n";
    return kExitOk;
}

/// Resolved settings of the selected subcommand as re-readable "sub.key=value" lines.
std::string resolved_config(const CLI::App& sub) {
    std::istringstream lines(sub.config_to_str(true, false));
    std::string out = "# resolved configuration; rerun with --config <this file>\n", line;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#' || line.ends_with("=\"\"")) continue;
        out += sub.get_name() + "." + line + "\n";
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiway data analysis: tensorization, decompositions, regression and experiment harnesses"};
    app.set_config("--config", "", "flat key = value file; keys are <subcommand>.<option>");
    app.require_subcommand(1);

    TensorizeArgs ta;
    auto* tz = app.add_subcommand("tensorize", "CSV table + plan -> sparse tensor, axis maps, density report");
    tz->add_option("--input", ta.input, "CSV table")->required()->check(CLI::ExistingFile);
    tz->add_option("--plan", ta.plan, "tensorization plan")->required()->check(CLI::ExistingFile);
    add_common(tz, ta.common);

    DecomposeArgs da;
    auto* dc = app.add_subcommand("decompose", "tensor -> CP, Tucker or TT model and fit report");
    dc->add_option("--input", da.input, "tensor text file")->required()->check(CLI::ExistingFile);
    dc->add_option("--kind", da.kind, "cp | tucker | tt")->capture_default_str();
    dc->add_option("--rank", da.rank, "CP rank")->capture_default_str();
    dc->add_option("--ranks", da.ranks, "Tucker ranks, or TT rank caps")->delimiter(',');
    dc->add_option("--sweep", da.sweep, "CP ranks to sweep instead of one fit")->delimiter(',');
    dc->add_option("--method", da.method, "Tucker: hosvd | hooi")->capture_default_str();
    dc->add_option("--init", da.init, "CP: random | hosvd")->capture_default_str();
    dc->add_option("--max-iters", da.max_iters)->capture_default_str();
    dc->add_option("--tol", da.tol, "stopping tolerance on the error decrease")->capture_default_str();
    dc->add_option("--tt-tol", da.tt_tol, "TT relative accuracy")->capture_default_str();
    dc->add_option("--restarts", da.restarts)->capture_default_str();
    dc->add_option("--ridge", da.ridge)->capture_default_str();
    dc->add_option("--seed", da.seed)->capture_default_str();
    add_common(dc, da.common);

    RegressArgs ra;
    auto* rg = app.add_subcommand("regress", "tensor regression with CP or Tucker coefficients");
    rg->add_option("--samples", ra.samples, "CSV: tensor file column, response column, covariate columns")
        ->required()
        ->check(CLI::ExistingFile);
    rg->add_option("--kind", ra.kind, "cp | tucker")->capture_default_str();
    rg->add_option("--rank", ra.rank)->capture_default_str();
    rg->add_option("--ranks", ra.ranks)->delimiter(',');
    rg->add_option("--lambda", ra.lambda)->capture_default_str();
    rg->add_option("--file-column", ra.file_column)->capture_default_str();
    rg->add_option("--response", ra.response)->capture_default_str();
    rg->add_option("--max-iters", ra.max_iters)->capture_default_str();
    rg->add_option("--tol", ra.tol)->capture_default_str();
    rg->add_option("--restarts", ra.restarts)->capture_default_str();
    rg->add_option("--seed", ra.seed)->capture_default_str();
    rg->add_flag("--no-intercept", ra.no_intercept);
    add_common(rg, ra.common);

    CompleteArgs ca;
    auto* cm = app.add_subcommand("complete", "masked CP completion of a partially observed tensor");
    cm->add_option("--input", ca.input, "observed entries (sparse tensor text)")->required()->check(CLI::ExistingFile);
    cm->add_option("--mask", ca.mask, "0/1 indicator tensor; default: the stored entries of --input")
        ->check(CLI::ExistingFile);
    cm->add_option("--rank", ca.rank)->capture_default_str();
    cm->add_option("--max-iters", ca.max_iters)->capture_default_str();
    cm->add_option("--tol", ca.tol)->capture_default_str();
    cm->add_option("--restarts", ca.restarts)->capture_default_str();
    cm->add_option("--seed", ca.seed)->capture_default_str();
    add_common(cm, ca.common);

    HankelizeArgs ha;
    auto* hk = app.add_subcommand("hankelize", "signal CSV (one column per channel) -> Hankel matrix or tensor");
    hk->add_option("--input", ha.input)->required()->check(CLI::ExistingFile);
    hk->add_option("--columns", ha.columns, "channel columns (default: all)")->delimiter(',');
    hk->add_option("--window", ha.window, "L; 0 means T/2")->capture_default_str();
    add_common(hk, ha.common);

    StatsArgs sa;
    auto* st = app.add_subcommand("stats", "norms, moments, cumulants and lagged covariances of a numeric CSV");
    st->add_option("--input", sa.input)->required()->check(CLI::ExistingFile);
    st->add_flag("--norms", sa.norms, "l1, l2 and max norms of all values");
    st->add_option("--moments", sa.moments, "central moments 1..k per column");
    st->add_option("--cumulant", sa.cumulant, "3 or 4: joint cumulant tensor of the columns");
    st->add_option("--lags", sa.lags, "lagged covariance tensor at these lags")->delimiter(',');
    add_common(st, sa.common);

    CompressArgs xa;
    auto* tc = app.add_subcommand("tt-compress", "dense layer weights -> TT layer and compression report");
    tc->add_option("--weights", xa.weights, "N x M weight matrix (tensor text)")->required()->check(CLI::ExistingFile);
    tc->add_option("--bias", xa.bias, "length-N bias (tensor text)")->check(CLI::ExistingFile);
    tc->add_option("--input-dims", xa.input_dims, "m_1..m_d")->required()->delimiter(',');
    tc->add_option("--output-dims", xa.output_dims, "n_1..n_d")->required()->delimiter(',');
    tc->add_option("--max-ranks", xa.max_ranks, "interior rank caps")->delimiter(',');
    tc->add_option("--tol", xa.tol, "relative accuracy")->capture_default_str();
    add_common(tc, xa.common);

    BssArgs ba;
    auto* bs = app.add_subcommand("bss-demo", "blind source separation: multiway vs PCA vs FastICA");
    bs->add_option("--sources", ba.sources, "K")->capture_default_str();
    bs->add_option("--channels", ba.channels, "C")->capture_default_str();
    bs->add_option("--samples", ba.samples, "T")->capture_default_str();
    bs->add_option("--freqs", ba.freqs, "rad/sample, one per source")->delimiter(',')->capture_default_str();
    bs->add_option("--kind", ba.kind, "sinusoid | damped")->capture_default_str();
    bs->add_option("--damping", ba.damping)->capture_default_str();
    bs->add_option("--window", ba.window, "L; 0 means T/2")->capture_default_str();
    bs->add_option("--rank", ba.rank, "CP rank; 0 means 2K")->capture_default_str();
    bs->add_option("--noise", ba.noise)->capture_default_str();
    bs->add_option("--methods", ba.methods)->delimiter(',')->capture_default_str();
    bs->add_option("--seed", ba.seed)->capture_default_str();
    add_common(bs, ba.common);

    ParamsArgs pa;
    auto* pr = app.add_subcommand("params", "free-parameter count of a regression model");
    pr->add_option("--kind", pa.kind, "cp | tucker | vectorized")->capture_default_str();
    pr->add_option("--dims", pa.dims, "covariate tensor shape")->required()->delimiter(',');
    pr->add_option("--rank", pa.rank)->capture_default_str();
    pr->add_option("--ranks", pa.ranks, "Tucker ranks")->delimiter(',');
    pr->add_option("--covariates", pa.covariates)->capture_default_str();
    pr->add_option("--mode", pa.mode, "raw | effective")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const std::vector<std::pair<CLI::App*, Common*>> with_out{{tz, &ta.common}, {dc, &da.common}, {rg, &ra.common},
                                                             {cm, &ca.common}, {hk, &ha.common}, {st, &sa.common},
                                                             {tc, &xa.common}, {bs, &ba.common}};
    try {
        if (pr->parsed()) return run_params(pa);
        for (const auto& [sub, common] : with_out) {
            if (!sub->parsed()) continue;
            Outputs out(common->out);
            int status = kExitOk;
            if (sub == tz) status = run_tensorize(ta, out);
            if (sub == dc) status = run_decompose(da, out);
            if (sub == rg) status = run_regress(ra, out);
            if (sub == cm) status = run_complete(ca, out);
            if (sub == hk) status = run_hankelize(ha, out);
            if (sub == st) status = run_stats(sa, out);
            if (sub == tc) status = run_tt_compress(xa, out);
            if (sub == bs) status = run_bss(ba, out);
            out.add("resolved_config.toml", resolved_config(*sub));
            out.commit();
            return status;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
