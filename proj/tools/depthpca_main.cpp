// Batch front end: every subcommand reads CSV/JSON inputs, writes CSV
// payloads plus a report.json, and is fully determined by its inputs, flags
// and seed. Exit codes: 0 ok, 2 validation, 3 convergence, 4 I/O.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "depthpca/commands.hpp"

namespace {

// --config JSON overrides flag values key by key
void apply_config_file(depthpca::RunConfig& cfg) {
    if (cfg.config_path.empty()) return;
    std::ifstream in(cfg.config_path);
    if (!in) throw depthpca::IoError("cannot open config file '" + cfg.config_path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw depthpca::InvalidInput(std::string("config file is not valid JSON: ") + e.what());
    }
    if (j.contains("input")) cfg.input_path = j["input"].get<std::string>();
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("seed")) {
        cfg.seed = j["seed"].get<std::uint64_t>();
        cfg.seed_set = true;
    }
    if (j.contains("estimator")) cfg.estimator = j["estimator"].get<std::string>();
    if (j.contains("estimators")) cfg.estimators = j["estimators"].get<std::vector<std::string>>();
    if (j.contains("depth")) cfg.depth = j["depth"].get<std::string>();
    if (j.contains("k")) cfg.k = j["k"].get<int>();
    if (j.contains("mc_n")) cfg.mc_n = j["mc_n"].get<std::size_t>();
    if (j.contains("reps")) cfg.reps = j["reps"].get<std::size_t>();
    if (j.contains("families")) cfg.families = j["families"].get<std::vector<std::string>>();
    if (j.contains("family")) cfg.family = j["family"].get<std::string>();
    if (j.contains("rho")) cfg.rho = j["rho"].get<double>();
    if (j.contains("lambda1")) cfg.lambda1 = j["lambda1"].get<double>();
    if (j.contains("p")) cfg.p = j["p"].get<int>();
    if (j.contains("sample_sizes"))
        cfg.sample_sizes = j["sample_sizes"].get<std::vector<std::size_t>>();
    if (j.contains("quantiles")) cfg.quantiles = j["quantiles"].get<std::vector<double>>();
    if (j.contains("mad_scale")) cfg.mad_scale = j["mad_scale"].get<bool>();
    if (j.contains("exclude_cols"))
        cfg.exclude_cols = j["exclude_cols"].get<std::vector<std::string>>();
    if (j.contains("q_max")) cfg.q_max = j["q_max"].get<int>();
    if (j.contains("grid_extent")) cfg.grid_extent = j["grid_extent"].get<double>();
    if (j.contains("grid_resolution"))
        cfg.grid_resolution = j["grid_resolution"].get<std::size_t>();
    if (j.contains("n_projections")) cfg.n_projections = j["n_projections"].get<std::size_t>();
    if (j.contains("fit")) cfg.fit_path = j["fit"].get<std::string>();
}

void add_common_flags(CLI::App* sub, depthpca::RunConfig& cfg, bool* seed_given) {
    sub->add_option("--input", cfg.input_path, "input CSV file");
    sub->add_option("--output-dir", cfg.output_dir, "directory for CSV payloads + report.json");
    sub->add_option("--seed", cfg.seed, "RNG seed (required for stochastic commands)")
        ->each([seed_given](const std::string&) { *seed_given = true; });
    sub->add_option("--estimator", cfg.estimator, "scatter estimator");
    sub->add_option("--estimators", cfg.estimators, "estimator list")->delimiter(',');
    sub->add_option("--depth", cfg.depth, "depth kind: halfspace|mahalanobis|projection");
    sub->add_option("--k", cfg.k, "number of retained components");
    sub->add_option("--mc-n", cfg.mc_n, "Monte Carlo draw count");
    sub->add_option("--reps", cfg.reps, "simulation replications");
    sub->add_option("--families", cfg.families, "family list, e.g. bvn,t5,t10")->delimiter(',');
    sub->add_option("--family", cfg.family, "single family, e.g. bvn or t10");
    sub->add_option("--rho", cfg.rho, "eigenvalue ratio lambda2/lambda1");
    sub->add_option("--lambda1", cfg.lambda1, "leading eigenvalue of the model covariance");
    sub->add_option("--p", cfg.p, "dimension");
    sub->add_option("--n", cfg.sample_sizes, "sample sizes")->delimiter(',');
    sub->add_option("--quantiles", cfg.quantiles, "probabilities for OD^2 quantiles")
        ->delimiter(',');
    sub->add_flag("--mad-scale", cfg.mad_scale, "divide each column by its MAD");
    sub->add_option("--exclude-cols", cfg.exclude_cols, "columns to drop (names or 1-based)")
        ->delimiter(',');
    sub->add_option("--q-max", cfg.q_max, "rows in the unexplained-variance table");
    sub->add_option("--grid-extent", cfg.grid_extent, "grid half-width in sigma units");
    sub->add_option("--grid-resolution", cfg.grid_resolution, "grid points per axis");
    sub->add_option("--n-projections", cfg.n_projections, "random directions for projection depth");
    sub->add_option("--fit", cfg.fit_path, "fit.json produced by `pca`");
    sub->add_option("--config", cfg.config_path, "JSON file overriding flags");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"depth-based multivariate rank PCA toolkit"};
    app.require_subcommand(1);

    depthpca::RunConfig cfg;
    bool seed_given = false;
    const std::vector<std::string> names = {"pca",          "depth", "diagnose",
                                            "are",          "simulate-fse",
                                            "influence-grid"};
    for (const auto& name : names) add_common_flags(app.add_subcommand(name), cfg, &seed_given);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "error: validation: " << e.what() << '\n';
        return 2;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    cfg.seed_set = seed_given;
    try {
        apply_config_file(cfg);
    } catch (const depthpca::IoError& e) {
        std::cerr << "error: io: " << e.what() << '\n';
        return 4;
    } catch (const depthpca::InvalidInput& e) {
        std::cerr << "error: validation: " << e.what() << '\n';
        return 2;
    }
    return depthpca::run_command(cfg);
}
