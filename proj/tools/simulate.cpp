// Experiment runner CLI.
//
//   simulate --config exp.cfg [--K 5 --M 2 --T 100000 --runs 20 --seed 1
//             --policy proposed --mu-top 1.0 --mu-bottom 0.01 --out out/fig]
//
// Writes <out>_runs.csv, <out>_agg.csv and <out>.svg. Exit codes: 0 success,
// 1 configuration error, 2 I/O error.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "mmab/harness.hpp"
#include "mmab/plot.hpp"

namespace {

std::string describe(const mmab::ExperimentConfig& config) {
    std::string s = "policy=" + mmab::to_string(config.policy) +
                    " K=" + std::to_string(config.K) + " M=" + std::to_string(config.M) +
                    " T=" + std::to_string(config.T) + " runs=" + std::to_string(config.runs);
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-player bandit simulator (no collision sensing)"};
    app.name("simulate");

    std::string config_path;
    std::string policy_name;
    std::string out_path;
    long K = -1, M = -1, T = -1, runs = -1;
    long long seed = -1;
    double mu_top = -1.0, mu_bottom = -1.0;

    app.add_option("--config", config_path, "experiment config file (key = value)");
    app.add_option("--K", K, "number of arms");
    app.add_option("--M", M, "number of players");
    app.add_option("--T", T, "time horizon in slots");
    app.add_option("--runs", runs, "independent runs");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--policy", policy_name, "proposed | oracle | uniform");
    app.add_option("--mu-top", mu_top, "best mean of the linear profile");
    app.add_option("--mu-bottom", mu_bottom, "worst mean of the linear profile");
    app.add_option("--out", out_path, "output path stem");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    mmab::ExperimentConfig config;
    try {
        if (!config_path.empty()) config = mmab::parse_config_file(config_path);
        if (K >= 0) config.K = static_cast<int>(K);
        if (M >= 0) config.M = static_cast<int>(M);
        if (T >= 0) config.T = T;
        if (runs >= 0) config.runs = static_cast<int>(runs);
        if (seed >= 0) config.master_seed = static_cast<std::uint64_t>(seed);
        if (!policy_name.empty()) config.policy = mmab::policy_kind_from_string(policy_name);
        if (mu_top >= 0.0) config.mu_top = mu_top;
        if (mu_bottom >= 0.0) config.mu_bottom = mu_bottom;
        if (!out_path.empty()) config.output_path = out_path;
        config.validate();
    } catch (const mmab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }

    std::printf("running %s\n", describe(config).c_str());
    const std::vector<mmab::RunRecord> records = mmab::run_experiment(config);
    const mmab::AggregateCurve curve = mmab::aggregate(records);

    int successes = 0;
    for (const auto& r : records) successes += r.success ? 1 : 0;
    std::printf("mean final regret: %s", mmab::format_double(curve.mean.back()).c_str());
    if (curve.ci_defined)
        std::printf("  (95%% CI %s .. %s)", mmab::format_double(curve.lower95.back()).c_str(),
                    mmab::format_double(curve.upper95.back()).c_str());
    std::printf("\nassignment success: %d/%d runs\n", successes, config.runs);

    if (config.output_path.empty()) {
        std::printf("no output_path set; skipping CSV/plot emission\n");
        return 0;
    }

    try {
        const std::filesystem::path stem(config.output_path);
        if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
        mmab::write_runs_csv(records, config.output_path + "_runs.csv");
        mmab::write_aggregate_csv(curve, config.output_path + "_agg.csv");
        mmab::emit_plot(curve, config.output_path + ".svg", describe(config));
        std::printf("wrote %s_runs.csv, %s_agg.csv, %s.svg\n", config.output_path.c_str(),
                    config.output_path.c_str(), config.output_path.c_str());
    } catch (const mmab::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 2;
    } catch (const mmab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 2;
    }
    return 0;
}
