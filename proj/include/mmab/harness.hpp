#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmab/bandit_env.hpp"

// Declarative experiment runner: seeded multi-run execution of a policy
// against fresh environments, regret checkpoints, normal-approximation 95%
// confidence intervals, CSV output and an SVG regret plot.

namespace mmab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PolicyKind { Proposed, Oracle, Uniform };

PolicyKind policy_kind_from_string(const std::string& name);
std::string to_string(PolicyKind kind);

struct ExperimentConfig {
    int K = 0;
    int M = 0;
    long T = 0;
    std::vector<double> means; // explicit profile; empty -> linear from mu_top/mu_bottom
    double mu_top = 1.0;
    double mu_bottom = 0.0;
    int runs = 20;
    std::uint64_t master_seed = 1;
    PolicyKind policy = PolicyKind::Proposed;
    int checkpoints = 500;
    std::string output_path; // stem for <stem>_runs.csv, <stem>_agg.csv, <stem>.svg

    // Resolved arm means (explicit list, or the linear profile).
    ArmMeans resolve_means() const;
    void validate() const; // throws ConfigError
};

// mu_(k) = mu_top + (k-1)/(K-1) * (mu_bottom - mu_top), K >= 2.
ArmMeans linear_means(int num_arms, double mu_top, double mu_bottom);

// Flat `key = value` file; '#' starts a comment. Keys match the
// ExperimentConfig field names; `means` is a comma-separated list.
ExperimentConfig parse_config_file(const std::string& path);
// Parse a single key/value pair into `config` (also used for CLI overrides).
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

struct RunRecord {
    int run_id = 0;
    std::vector<std::pair<long, double>> checkpoints; // (slot, cumulative regret)
    bool success = false;        // terminal assignment is a distinct top-M set
    std::vector<int> assignment; // per-player terminal arm (proposed policy only)
    long settled_slot = -1;      // first slot with every player exploiting
    double regret_at_settle = 0.0;
    double final_regret = 0.0;
};

// Run `config.runs` independent simulations (in parallel across worker
// threads; records are ordered by run_id and depend only on the seeds).
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);

struct AggregateCurve {
    std::vector<long> slots;
    std::vector<double> mean;
    std::vector<double> lower95;
    std::vector<double> upper95;
    bool ci_defined = false; // false with fewer than 2 runs
    int runs = 0;
};

// Per checkpoint: sample mean and mean +/- 1.96 * sd / sqrt(runs).
AggregateCurve aggregate(const std::vector<RunRecord>& records);

// Schema: run_id,slot,cumulative_regret (17 significant digits, so values
// reload bit-exactly).
void write_runs_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_runs_csv(const std::string& path);

// Schema: slot,mean,lower95,upper95; CI columns are left empty when
// undefined. A leading '#' comment records the CI method.
void write_aggregate_csv(const AggregateCurve& curve, const std::string& path);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

} // namespace mmab
