#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "depthpca/asymptotics.hpp"
#include "depthpca/csvio.hpp"
#include "depthpca/depth.hpp"
#include "depthpca/diagnostics.hpp"
#include "depthpca/errors.hpp"
#include "depthpca/ranks.hpp"
#include "depthpca/report.hpp"
#include "depthpca/scatter.hpp"
#include "depthpca/simulation.hpp"

namespace depthpca {

struct RunConfig {
    std::string command;
    std::string input_path;
    std::string output_dir = ".";
    std::string fit_path;
    std::string config_path;

    std::uint64_t seed = 0;
    bool seed_set = false;

    std::string estimator = "dcm-projection";
    std::vector<std::string> estimators; // are / simulate-fse / influence-grid
    std::string depth = "projection";
    int k = 0;

    std::size_t mc_n = 1000000;
    std::size_t reps = 1000;
    std::vector<std::string> families = {"bvn"};
    std::string family = "bvn";
    double rho = 0.5;
    double lambda1 = 2.0;
    int p = 2;
    std::vector<std::size_t> sample_sizes = {100, 300, 500};
    std::vector<double> quantiles;

    bool mad_scale = false;
    std::vector<std::string> exclude_cols;
    int q_max = 6;

    double grid_extent = 10.0;
    std::size_t grid_resolution = 101;
    std::size_t n_projections = 500;
};

namespace detail {

struct FamilySpec {
    Family family = Family::Normal;
    int df = 0;
    std::string label;
};

inline FamilySpec parse_family(const std::string& s) {
    if (s == "bvn" || s == "normal" || s == "mvn") return {Family::Normal, 0, s};
    if (s.size() > 1 && s[0] == 't') {
        const std::string digits = s.substr(1);
        if (!digits.empty() &&
            std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
            return {Family::StudentT, std::stoi(digits), s};
    }
    throw InvalidInput("unknown family '" + s + "' (use normal|bvn or t<df>)");
}

inline void require_seed(const RunConfig& cfg) {
    if (!cfg.seed_set)
        throw InvalidInput("--seed is required (stochastic command, no wall-clock default)");
}

inline std::filesystem::path prepare_output_dir(const RunConfig& cfg) {
    const std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.output_dir + "'");
    return dir;
}

// --exclude-cols plus optional per-column MAD scaling; entries name columns
// by header or 1-based index.
inline void preprocess(CsvTable& table, const RunConfig& cfg) {
    if (!cfg.exclude_cols.empty()) {
        std::vector<bool> drop(table.header.size(), false);
        for (const std::string& spec : cfg.exclude_cols) {
            std::size_t idx;
            const bool numeric =
                !spec.empty() &&
                std::all_of(spec.begin(), spec.end(), [](unsigned char c) { return std::isdigit(c); });
            if (numeric) {
                const std::size_t one_based = std::stoul(spec);
                if (one_based < 1 || one_based > table.header.size())
                    throw InvalidInput("--exclude-cols: index " + spec + " out of range");
                idx = one_based - 1;
            } else {
                idx = table.column_index(spec);
            }
            drop[idx] = true;
        }
        std::vector<std::string> header;
        std::vector<std::size_t> keep;
        for (std::size_t j = 0; j < table.header.size(); ++j)
            if (!drop[j]) {
                header.push_back(table.header[j]);
                keep.push_back(j);
            }
        if (keep.empty()) throw InvalidInput("--exclude-cols removed every column");
        Matrix values(table.values.rows(), keep.size());
        for (std::size_t i = 0; i < values.rows(); ++i)
            for (std::size_t j = 0; j < keep.size(); ++j) values(i, j) = table.values(i, keep[j]);
        table.header = std::move(header);
        table.values = std::move(values);
    }
    if (cfg.mad_scale) {
        const std::size_t n = table.values.rows(), p = table.values.cols();
        Vec col(n);
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = table.values(i, j);
            Vec tmp = col;
            const double med = median_inplace(tmp);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = std::abs(col[i] - med);
            const double mad = median_inplace(tmp);
            if (mad == 0.0)
                throw InvalidInput("--mad-scale: column '" + table.header[j] +
                                   "' has zero MAD; exclude it with --exclude-cols");
            for (std::size_t i = 0; i < n; ++i) table.values(i, j) = col[i] / mad;
        }
    }
}

inline nlohmann::json config_echo(const RunConfig& cfg) {
    nlohmann::json j;
    j["input"] = cfg.input_path;
    j["output_dir"] = cfg.output_dir;
    j["estimator"] = cfg.estimator;
    j["estimators"] = cfg.estimators;
    j["depth"] = cfg.depth;
    j["k"] = cfg.k;
    j["mc_n"] = cfg.mc_n;
    j["reps"] = cfg.reps;
    j["families"] = cfg.families;
    j["family"] = cfg.family;
    j["rho"] = cfg.rho;
    j["lambda1"] = cfg.lambda1;
    j["p"] = cfg.p;
    j["sample_sizes"] = cfg.sample_sizes;
    j["quantiles"] = cfg.quantiles;
    j["mad_scale"] = cfg.mad_scale;
    j["exclude_cols"] = cfg.exclude_cols;
    j["q_max"] = cfg.q_max;
    j["grid_extent"] = cfg.grid_extent;
    j["grid_resolution"] = cfg.grid_resolution;
    j["n_projections"] = cfg.n_projections;
    j["fit"] = cfg.fit_path;
    return j;
}

inline nlohmann::json fit_to_json(const ScatterFit& fit) {
    nlohmann::json j;
    j["estimator"] = fit.kind.name();
    j["center"] = fit.center;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["dropped_rows"] = fit.dropped_rows;
    const std::size_t p = fit.matrix.rows();
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t a = 0; a < p; ++a) {
        nlohmann::json r = nlohmann::json::array();
        for (std::size_t b = 0; b < p; ++b) r.push_back(fit.matrix(a, b));
        rows.push_back(std::move(r));
    }
    j["matrix"] = std::move(rows);
    return j;
}

inline ScatterFit fit_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open fit file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("fit file '" + path + "' is not valid JSON: " + e.what());
    }
    ScatterFit fit;
    try {
        fit.kind = EstimatorKind::parse(j.at("estimator").get<std::string>());
        fit.center = j.at("center").get<Vec>();
        const auto& rows = j.at("matrix");
        const std::size_t p = rows.size();
        fit.matrix = Matrix(p, p);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b) fit.matrix(a, b) = rows[a][b].get<double>();
        fit.iterations = j.value("iterations", 0);
        fit.converged = j.value("converged", true);
        fit.dropped_rows = j.value("dropped_rows", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("fit file '" + path + "' is malformed: " + e.what());
    }
    fit.decomp = eigh(fit.matrix);
    return fit;
}

inline void write_diagnostics_csv(const std::filesystem::path& path, const Matrix& scores,
                                  const DiagnosticsReport& rep) {
    CsvWriter csv(path.string());
    std::vector<std::string> head = {"row"};
    for (std::size_t j = 0; j < scores.cols(); ++j)
        head.push_back("score_" + std::to_string(j + 1));
    head.insert(head.end(), {"sd", "od", "flag"});
    csv.header(head);
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        std::vector<std::string> cells = {std::to_string(i + 1)};
        for (std::size_t j = 0; j < scores.cols(); ++j)
            cells.push_back(format_double(scores(i, j)));
        cells.push_back(format_double(rep.sd[i]));
        cells.push_back(format_double(rep.od[i]));
        cells.push_back(outlier_flag_name(rep.flags[i]));
        csv.row(cells);
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// pca: fit an estimator, emit eigenvalues/vectors, the unexplained-variance
// table and (with --k) projection diagnostics plus a fit file for `diagnose`.
inline int cmd_pca(const RunConfig& cfg) {
    detail::require_seed(cfg);
    const EstimatorKind kind = EstimatorKind::parse(cfg.estimator);
    const auto dir = detail::prepare_output_dir(cfg);
    WallClock clock;

    CsvTable table = read_csv(cfg.input_path);
    detail::preprocess(table, cfg);
    const Matrix& data = table.values;
    if (cfg.k < 0 || static_cast<std::size_t>(cfg.k) > data.cols())
        throw InvalidInput("--k out of range");

    ScatterOptions opts;
    opts.seed = cfg.seed;
    opts.n_projections = cfg.n_projections;
    const ScatterFit fit = fit_scatter(kind, data, opts);
    const std::size_t p = data.cols();

    Report report;
    report.command = "pca";
    report.seed = cfg.seed;
    report.config = detail::config_echo(cfg);

    {
        CsvWriter csv((dir / "eigenvalues.csv").string());
        csv.header({"component", "eigenvalue"});
        for (std::size_t j = 0; j < p; ++j)
            csv.row({std::to_string(j + 1), format_double(fit.decomp.eigenvalues[j])});
        report.payload_files.push_back("eigenvalues.csv");
    }
    {
        CsvWriter csv((dir / "eigenvectors.csv").string());
        std::vector<std::string> head = {"variable"};
        for (std::size_t j = 0; j < p; ++j) head.push_back("pc_" + std::to_string(j + 1));
        csv.header(head);
        for (std::size_t a = 0; a < p; ++a) {
            std::vector<std::string> cells = {table.header[a]};
            for (std::size_t j = 0; j < p; ++j)
                cells.push_back(format_double(fit.decomp.eigenvectors(a, j)));
            csv.row(cells);
        }
        report.payload_files.push_back("eigenvectors.csv");
    }
    {
        CsvWriter csv((dir / "unexplained.csv").string());
        csv.header({"q", "unexplained"});
        const std::size_t q_hi = std::min<std::size_t>(p, std::max(cfg.q_max, 1));
        for (std::size_t q = 1; q <= q_hi; ++q)
            csv.row({std::to_string(q), format_double(unexplained_variance(fit, q))});
        report.payload_files.push_back("unexplained.csv");
    }
    {
        std::ofstream out(dir / "fit.json");
        if (!out) throw IoError("cannot write fit.json");
        out << detail::fit_to_json(fit).dump(2) << '\n';
        report.payload_files.push_back("fit.json");
    }
    if (cfg.k >= 1) {
        const PcaProjection proj = project(fit, data, static_cast<std::size_t>(cfg.k));
        const DiagnosticsReport diag = diagnose(proj, data);
        detail::write_diagnostics_csv(dir / "diagnostics.csv", proj.scores, diag);
        report.payload_files.push_back("diagnostics.csv");
        report.summary["sd_cut"] = diag.sd_cut;
        report.summary["od_cut"] = diag.od_cut;
        report.summary["od_mad_degenerate"] = diag.od_mad_degenerate;
        std::size_t flagged = 0;
        for (auto f : diag.flags)
            if (f != OutlierFlag::Regular) ++flagged;
        report.summary["flagged"] = flagged;
    }
    report.summary["n"] = data.rows();
    report.summary["p"] = p;
    report.summary["estimator"] = kind.name();
    report.summary["iterations"] = fit.iterations;
    report.summary["converged"] = fit.converged;
    report.summary["dropped_rows"] = fit.dropped_rows;
    report.wall_time_s = clock.seconds();
    report.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// depth: per-row depth, htped and multivariate rank columns.
inline int cmd_depth(const RunConfig& cfg) {
    detail::require_seed(cfg);
    const DepthKind kind = parse_depth_kind(cfg.depth);
    const auto dir = detail::prepare_output_dir(cfg);
    WallClock clock;

    CsvTable table = read_csv(cfg.input_path);
    detail::preprocess(table, cfg);
    const Matrix& data = table.values;
    const std::size_t n = data.rows(), p = data.cols();

    const DepthModel model = DepthModel::fit(kind, data, cfg.seed, cfg.n_projections);
    const Vec mu = spatial_median(data).value;
    const auto ranks = rank_transform(model, mu, data);

    CsvWriter csv((dir / "depths.csv").string());
    std::vector<std::string> head = table.header;
    head.insert(head.end(), {"depth", "htped"});
    for (std::size_t j = 0; j < p; ++j) head.push_back("rank_" + std::to_string(j + 1));
    csv.header(head);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> cells;
        for (std::size_t j = 0; j < p; ++j) cells.push_back(format_double(data(i, j)));
        const double d = model.depth_at(data.row(i));
        cells.push_back(format_double(d));
        cells.push_back(format_double(model.max_depth() - d));
        for (std::size_t j = 0; j < p; ++j) cells.push_back(format_double(ranks[i].value[j]));
        csv.row(cells);
    }

    Report report;
    report.command = "depth";
    report.seed = cfg.seed;
    report.config = detail::config_echo(cfg);
    report.payload_files = {"depths.csv"};
    report.summary["n"] = n;
    report.summary["p"] = p;
    report.summary["depth"] = depth_kind_name(kind);
    report.summary["max_depth"] = model.max_depth();
    report.summary["center"] = mu;
    report.wall_time_s = clock.seconds();
    report.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// diagnose: score/orthogonal distances and outlier flags for an existing fit.
inline int cmd_diagnose(const RunConfig& cfg) {
    if (cfg.fit_path.empty()) throw InvalidInput("--fit is required for diagnose");
    if (cfg.k < 1) throw InvalidInput("--k must be >= 1 for diagnose");
    const auto dir = detail::prepare_output_dir(cfg);
    WallClock clock;

    CsvTable table = read_csv(cfg.input_path);
    detail::preprocess(table, cfg);
    const ScatterFit fit = detail::fit_from_json(cfg.fit_path);
    const PcaProjection proj = project(fit, table.values, static_cast<std::size_t>(cfg.k));
    const DiagnosticsReport rep = diagnose(proj, table.values);
    detail::write_diagnostics_csv(dir / "diagnostics.csv", proj.scores, rep);

    Report report;
    report.command = "diagnose";
    report.seed = cfg.seed;
    report.config = detail::config_echo(cfg);
    report.payload_files = {"diagnostics.csv"};
    report.summary["sd_cut"] = rep.sd_cut;
    report.summary["od_cut"] = rep.od_cut;
    report.summary["od_mad_degenerate"] = rep.od_mad_degenerate;
    if (rep.od_mad_degenerate)
        std::cerr << "warning: all orthogonal distances identical; OD cutoff fell back to the median\n";
    std::size_t flagged = 0;
    nlohmann::json flagged_rows = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.flags.size(); ++i)
        if (rep.flags[i] != OutlierFlag::Regular) {
            ++flagged;
            flagged_rows.push_back(i + 1);
        }
    report.summary["flagged"] = flagged;
    report.summary["flagged_rows"] = flagged_rows;
    if (!cfg.quantiles.empty()) {
        const Vec q = squared_distance_quantiles(fit, table.values,
                                                 static_cast<std::size_t>(cfg.k), cfg.quantiles);
        report.summary["od2_quantiles"] = q;
    }
    report.wall_time_s = clock.seconds();
    report.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// are: asymptotic relative efficiency table over a (family x estimator) grid.
inline int cmd_are(const RunConfig& cfg) {
    detail::require_seed(cfg);
    if (!(cfg.rho > 0.0)) throw InvalidInput("--rho must be positive");
    std::vector<std::string> estimators = cfg.estimators;
    if (estimators.empty())
        estimators = {"scm", "tyler", "dcm-halfspace", "dcm-mahalanobis", "dcm-projection"};
    for (const auto& e : estimators) EstimatorKind::parse(e); // validate before work
    std::vector<detail::FamilySpec> families;
    for (const auto& f : cfg.families) families.push_back(detail::parse_family(f));
    const auto dir = detail::prepare_output_dir(cfg);
    WallClock clock;

    CsvWriter csv((dir / "are.csv").string());
    csv.header({"family", "df", "rho", "estimator", "are", "mc_se", "numerator", "denominator",
                "status"});
    std::size_t degenerate_cells = 0;
    for (const auto& fam : families) {
        Matrix sigma(2, 2);
        sigma(0, 0) = cfg.lambda1;
        sigma(1, 1) = cfg.lambda1 * cfg.rho;
        for (std::size_t e = 0; e < estimators.size(); ++e) {
            std::vector<std::string> cells = {fam.label, std::to_string(fam.df),
                                              format_double(cfg.rho), estimators[e]};
            try {
                EllipticalModel model{fam.family, fam.df, Vec(2, 0.0), sigma};
                const std::uint64_t cell_seed =
                    Rng::derive(cfg.seed, fam.df * 1000 + e);
                const AreResult r = are_eigvec(model, EstimatorKind::parse(estimators[e]), 1,
                                               cfg.mc_n, cell_seed);
                cells.insert(cells.end(),
                             {format_double(r.value), format_double(r.mc_std_error),
                              format_double(r.numerator), format_double(r.denominator), "ok"});
            } catch (const InvalidInput& e_degen) {
                ++degenerate_cells;
                cells.insert(cells.end(), {"nan", "nan", "nan", "nan",
                                           std::string("degenerate: ") + e_degen.what()});
            }
            csv.row(cells);
        }
    }

    Report report;
    report.command = "are";
    report.seed = cfg.seed;
    report.config = detail::config_echo(cfg);
    report.payload_files = {"are.csv"};
    report.summary["degenerate_cells"] = degenerate_cells;
    report.wall_time_s = clock.seconds();
    report.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// simulate-fse: the finite-sample efficiency protocol with per-cell
// checkpoints; a rerun resumes from finished cells and produces the same
// table bit for bit.
inline int cmd_simulate_fse(const RunConfig& cfg) {
    detail::require_seed(cfg);
    const detail::FamilySpec fam = detail::parse_family(cfg.family);
    if (cfg.p < 2) throw InvalidInput("--p must be >= 2");
    if (cfg.reps < 1) throw InvalidInput("--reps must be >= 1");
    std::vector<std::string> est_names = cfg.estimators;
    if (est_names.empty())
        est_names = {"scm", "tyler", "dcm-halfspace", "dcm-mahalanobis", "dcm-projection"};
    std::vector<EstimatorKind> estimators;
    for (const auto& e : est_names) estimators.push_back(EstimatorKind::parse(e));
    for (std::size_t n : cfg.sample_sizes)
        if (n < static_cast<std::size_t>(cfg.p) + 2)
            throw InvalidInput("--n entries must be >= p+2");
    const auto dir = detail::prepare_output_dir(cfg);
    WallClock clock;

    // covariance diag(p, p-1, ..., 1), centered at the origin
    const std::size_t p = static_cast<std::size_t>(cfg.p);
    Matrix sigma(p, p);
    for (std::size_t j = 0; j < p; ++j) sigma(j, j) = static_cast<double>(p - j);
    EllipticalModel model{fam.family, fam.df, Vec(p, 0.0), sigma};
    model.validate();

    CsvWriter csv((dir / "fse.csv").string());
    csv.header({"family", "df", "p", "n", "estimator", "mspa", "fse", "mc_se", "failures"});
    std::size_t resumed_cells = 0;
    for (std::size_t n : cfg.sample_sizes) {
        const std::string ckpt_name = "ckpt_" + fam.label + "_p" + std::to_string(p) + "_n" +
                                      std::to_string(n) + "_seed" + std::to_string(cfg.seed) +
                                      ".json";
        const auto ckpt_path = dir / ckpt_name;
        nlohmann::json cell_rows;
        bool loaded = false;
        if (std::filesystem::exists(ckpt_path)) {
            std::ifstream in(ckpt_path);
            try {
                in >> cell_rows;
                loaded = cell_rows.is_array();
            } catch (const nlohmann::json::exception&) {
                loaded = false; // corrupt checkpoint: recompute
            }
        }
        if (!loaded) {
            SimPlan plan{model, estimators, {n}, cfg.reps, cfg.seed, cfg.n_projections};
            const FseTable t = run_fse(plan);
            cell_rows = nlohmann::json::array();
            for (const auto& c : t.cells) {
                nlohmann::json r;
                r["estimator"] = c.estimator.name();
                r["n"] = c.n;
                r["mspa"] = c.mspa;
                r["fse"] = c.fse;
                r["mc_se"] = c.mc_se;
                r["failures"] = c.failures;
                r["valid"] = c.valid;
                cell_rows.push_back(std::move(r));
            }
            std::ofstream out(ckpt_path);
            if (!out) throw IoError("cannot write checkpoint '" + ckpt_path.string() + "'");
            out << cell_rows.dump(2) << '\n';
        } else {
            ++resumed_cells;
        }
        for (const auto& r : cell_rows) {
            csv.row({fam.label, std::to_string(fam.df), std::to_string(p),
                     std::to_string(r.at("n").get<std::size_t>()),
                     r.at("estimator").get<std::string>(),
                     format_double(r.at("mspa").get<double>()),
                     format_double(r.at("fse").get<double>()),
                     format_double(r.at("mc_se").get<double>()),
                     std::to_string(r.at("failures").get<std::size_t>())});
        }
    }

    Report report;
    report.command = "simulate-fse";
    report.seed = cfg.seed;
    report.config = detail::config_echo(cfg);
    report.payload_files = {"fse.csv"};
    report.summary["resumed_cells"] = resumed_cells;
    report.wall_time_s = clock.seconds();
    report.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// influence-grid: ||IF|| of the first eigenvector on a plotting grid, one CSV
// per estimator, with bounded/unbounded boundary behavior in the metadata.
inline int cmd_influence_grid(const RunConfig& cfg) {
    detail::require_seed(cfg);
    if (cfg.p != 2) throw InvalidInput("influence-grid: only p = 2 is supported");
    const detail::FamilySpec fam = detail::parse_family(cfg.family);
    std::vector<std::string> estimators = cfg.estimators;
    if (estimators.empty())
        estimators = {"sample-cov", "scm", "tyler", "dcm-halfspace", "dcm-mahalanobis",
                      "dcm-projection"};
    for (const auto& e : estimators) EstimatorKind::parse(e);
    const auto dir = detail::prepare_output_dir(cfg);
    WallClock clock;

    Matrix sigma(2, 2);
    sigma(0, 0) = cfg.lambda1;
    sigma(1, 1) = cfg.lambda1 * cfg.rho;
    EllipticalModel model{fam.family, fam.df, Vec(2, 0.0), sigma};
    model.validate();
    const double sx = cfg.grid_extent * std::sqrt(sigma(0, 0));
    const double sy = cfg.grid_extent * std::sqrt(sigma(1, 1));

    Report report;
    report.command = "influence-grid";
    report.seed = cfg.seed;
    report.config = detail::config_echo(cfg);
    nlohmann::json growth = nlohmann::json::object();
    for (std::size_t e = 0; e < estimators.size(); ++e) {
        const InfluenceGrid g =
            influence_grid(EstimatorKind::parse(estimators[e]), model, 1, -sx, sx, -sy, sy,
                           cfg.grid_resolution, cfg.mc_n, Rng::derive(cfg.seed, e));
        const std::string fname = "if_" + estimators[e] + ".csv";
        CsvWriter csv((dir / fname).string());
        csv.header({"x", "y", "if_norm"});
        for (std::size_t r = 0; r < g.ys.size(); ++r)
            for (std::size_t c = 0; c < g.xs.size(); ++c)
                csv.numeric_row({g.xs[c], g.ys[r], g.norms(r, c)});
        report.payload_files.push_back(fname);
        growth[estimators[e]] = g.boundary_growth;
    }
    report.summary["boundary_growth"] = growth;
    report.wall_time_s = clock.seconds();
    report.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
inline int run_command(const RunConfig& cfg) {
    try {
        if (cfg.command == "pca") return cmd_pca(cfg);
        if (cfg.command == "depth") return cmd_depth(cfg);
        if (cfg.command == "diagnose") return cmd_diagnose(cfg);
        if (cfg.command == "are") return cmd_are(cfg);
        if (cfg.command == "simulate-fse") return cmd_simulate_fse(cfg);
        if (cfg.command == "influence-grid") return cmd_influence_grid(cfg);
        std::cerr << "error: validation: unknown command '" << cfg.command << "'\n";
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << "error: validation: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceFailure& e) {
        std::cerr << "error: convergence: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: io: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
}

} // namespace depthpca
