#include "mmab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "mmab/policy.hpp"
#include "mmab/rng.hpp"

namespace mmab {

PolicyKind policy_kind_from_string(const std::string& name) {
    if (name == "proposed") return PolicyKind::Proposed;
    if (name == "oracle") return PolicyKind::Oracle;
    if (name == "uniform") return PolicyKind::Uniform;
    throw ConfigError("unknown policy '" + name + "' (expected proposed|oracle|uniform)");
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Proposed: return "proposed";
        case PolicyKind::Oracle: return "oracle";
        case PolicyKind::Uniform: return "uniform";
    }
    return "?";
}

ArmMeans linear_means(int num_arms, double mu_top, double mu_bottom) {
    if (num_arms < 2) throw ConfigError("linear_means: K must be >= 2");
    if (!(mu_top >= mu_bottom)) throw ConfigError("linear_means: need mu_top >= mu_bottom");
    if (!(mu_top >= 0.0 && mu_top <= 1.0 && mu_bottom >= 0.0 && mu_bottom <= 1.0))
        throw ConfigError("linear_means: profile endpoints outside [0,1]");
    std::vector<double> means(static_cast<std::size_t>(num_arms));
    // weighted-average form keeps both endpoints exact
    for (int k = 1; k <= num_arms; ++k)
        means[static_cast<std::size_t>(k) - 1] =
            (static_cast<double>(num_arms - k) * mu_top + static_cast<double>(k - 1) * mu_bottom) /
            static_cast<double>(num_arms - 1);
    return ArmMeans(means);
}

ArmMeans ExperimentConfig::resolve_means() const {
    if (!means.empty()) {
        if (static_cast<int>(means.size()) != K)
            throw ConfigError("means list length does not match K");
        return ArmMeans(means);
    }
    return linear_means(K, mu_top, mu_bottom);
}

void ExperimentConfig::validate() const {
    if (K < 2) throw ConfigError("K must be >= 2");
    if (M < 1 || M >= K) throw ConfigError("need 1 <= M < K");
    if (T < 1) throw ConfigError("T must be >= 1");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (checkpoints < 2) throw ConfigError("checkpoints must be >= 2");
    try {
        resolve_means();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_means_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty entry in means list");
        values.push_back(std::stod(item));
    }
    if (values.empty()) throw ConfigError("means list is empty");
    return values;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    try {
        if constexpr (std::is_same_v<T, double>) return std::stod(value);
        else if constexpr (std::is_same_v<T, std::uint64_t>) return std::stoull(value);
        else return static_cast<T>(std::stoll(value));
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for '" + key + "': " + value);
    }
}

} // namespace

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "K") config.K = parse_number<int>(key, value);
    else if (key == "M") config.M = parse_number<int>(key, value);
    else if (key == "T") config.T = parse_number<long>(key, value);
    else if (key == "means") config.means = parse_means_list(value);
    else if (key == "mu_top") config.mu_top = parse_number<double>(key, value);
    else if (key == "mu_bottom") config.mu_bottom = parse_number<double>(key, value);
    else if (key == "runs") config.runs = parse_number<int>(key, value);
    else if (key == "master_seed") config.master_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "policy") config.policy = policy_kind_from_string(value);
    else if (key == "checkpoints") config.checkpoints = parse_number<int>(key, value);
    else if (key == "output_path") config.output_path = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
}

// ---- experiment execution ----

namespace {

// Arms of the M largest means, ties broken by index.
std::vector<int> top_m_arms(const ArmMeans& means, int m) {
    std::vector<int> arms(static_cast<std::size_t>(means.count()));
    for (int k = 1; k <= means.count(); ++k) arms[static_cast<std::size_t>(k) - 1] = k;
    std::stable_sort(arms.begin(), arms.end(),
                     [&](int a, int b) { return means.mean(a) > means.mean(b); });
    arms.resize(static_cast<std::size_t>(m));
    return arms;
}

// Distinct arms whose means attain the top-M sum (handles ties by value).
bool is_top_m_set(const ArmMeans& means, int m, const std::vector<int>& arms) {
    if (static_cast<int>(arms.size()) != m) return false;
    std::vector<int> sorted_arms = arms;
    std::sort(sorted_arms.begin(), sorted_arms.end());
    if (std::adjacent_find(sorted_arms.begin(), sorted_arms.end()) != sorted_arms.end())
        return false;
    std::vector<double> values;
    values.reserve(arms.size());
    for (int a : arms) values.push_back(means.mean(a));
    std::sort(values.begin(), values.end(), std::greater<>());
    for (int i = 0; i < m; ++i)
        if (values[static_cast<std::size_t>(i)] != means.sorted_desc()[static_cast<std::size_t>(i)])
            return false;
    return true;
}

RunRecord execute_run(const ExperimentConfig& config, const ArmMeans& means, int run_id) {
    RunRecord record;
    record.run_id = run_id;

    Environment env(means, config.M,
                    derive_seed(config.master_seed, static_cast<std::uint64_t>(run_id) + 1, 0));

    std::vector<std::unique_ptr<Policy>> players;
    std::vector<const ProposedPolicy*> proposed;
    const std::vector<int> oracle_arms = top_m_arms(means, config.M);
    for (int m = 0; m < config.M; ++m) {
        switch (config.policy) {
            case PolicyKind::Proposed: {
                auto p = std::make_unique<ProposedPolicy>();
                proposed.push_back(p.get());
                players.push_back(std::move(p));
                break;
            }
            case PolicyKind::Oracle:
                players.push_back(
                    std::make_unique<PinnedPolicy>(oracle_arms[static_cast<std::size_t>(m)]));
                break;
            case PolicyKind::Uniform:
                players.push_back(std::make_unique<UniformPolicy>());
                break;
        }
        players.back()->reset(derive_seed(config.master_seed,
                                          static_cast<std::uint64_t>(run_id) + 1,
                                          static_cast<std::uint64_t>(m) + 1),
                              config.K, config.T);
    }

    const long cadence = std::max(1L, config.T / config.checkpoints);
    std::vector<int> choices(static_cast<std::size_t>(config.M));
    bool settled = config.policy == PolicyKind::Oracle; // oracle starts settled
    if (settled) record.settled_slot = 0;

    for (long t = 1; t <= config.T; ++t) {
        for (int m = 0; m < config.M; ++m)
            choices[static_cast<std::size_t>(m)] = players[static_cast<std::size_t>(m)]->act(t);
        const std::vector<double>& rewards = env.step(choices);
        for (int m = 0; m < config.M; ++m)
            players[static_cast<std::size_t>(m)]->observe(rewards[static_cast<std::size_t>(m)]);

        if (!settled && !proposed.empty()) {
            bool all = true;
            for (const ProposedPolicy* p : proposed)
                if (p->progress().stage != Stage::Exploit) {
                    all = false;
                    break;
                }
            if (all) {
                settled = true;
                record.settled_slot = t;
                record.regret_at_settle = env.cumulative_regret();
            }
        }
        if (t % cadence == 0) env.mark_checkpoint();
    }
    if (env.ledger().checkpoints.empty() || env.ledger().checkpoints.back().first != config.T)
        env.mark_checkpoint();

    record.checkpoints = env.ledger().checkpoints;
    record.final_regret = env.cumulative_regret();

    switch (config.policy) {
        case PolicyKind::Proposed: {
            for (const ProposedPolicy* p : proposed)
                record.assignment.push_back(p->progress().assigned_arm);
            const bool all_exploiting =
                std::all_of(proposed.begin(), proposed.end(), [](const ProposedPolicy* p) {
                    return p->progress().stage == Stage::Exploit;
                });
            record.success = all_exploiting && is_top_m_set(means, config.M, record.assignment);
            break;
        }
        case PolicyKind::Oracle:
            record.assignment = oracle_arms;
            record.regret_at_settle = 0.0;
            record.success = true;
            break;
        case PolicyKind::Uniform:
            record.success = false;
            break;
    }
    return record;
}

} // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const ArmMeans means = config.resolve_means();

    std::vector<RunRecord> records(static_cast<std::size_t>(config.runs));
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(config.runs));

    if (workers <= 1) {
        for (int r = 0; r < config.runs; ++r)
            records[static_cast<std::size_t>(r)] = execute_run(config, means, r);
        return records;
    }

    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= config.runs) return;
            records[static_cast<std::size_t>(r)] = execute_run(config, means, r);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return records;
}

AggregateCurve aggregate(const std::vector<RunRecord>& records) {
    if (records.empty()) throw ConfigError("aggregate: no records");
    const std::size_t points = records.front().checkpoints.size();
    for (const RunRecord& r : records)
        if (r.checkpoints.size() != points)
            throw ConfigError("aggregate: records have mismatched checkpoint grids");

    AggregateCurve curve;
    curve.runs = static_cast<int>(records.size());
    curve.ci_defined = records.size() >= 2;
    curve.slots.resize(points);
    curve.mean.resize(points);
    curve.lower95.resize(points);
    curve.upper95.resize(points);

    const double n = static_cast<double>(records.size());
    for (std::size_t i = 0; i < points; ++i) {
        curve.slots[i] = records.front().checkpoints[i].first;
        double sum = 0.0;
        for (const RunRecord& r : records) sum += r.checkpoints[i].second;
        const double mean = sum / n;
        curve.mean[i] = mean;
        if (curve.ci_defined) {
            double ss = 0.0;
            for (const RunRecord& r : records) {
                const double d = r.checkpoints[i].second - mean;
                ss += d * d;
            }
            const double sd = std::sqrt(ss / (n - 1.0));
            const double half = 1.96 * sd / std::sqrt(n);
            curve.lower95[i] = mean - half;
            curve.upper95[i] = mean + half;
        } else {
            curve.lower95[i] = mean;
            curve.upper95[i] = mean;
        }
    }
    return curve;
}

// ---- CSV ----

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_runs_csv(const std::vector<RunRecord>& records, const std::string& path) {
    if (records.empty()) throw IoError("write_runs_csv: nothing to write");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "run_id,slot,cumulative_regret\n";
    for (const RunRecord& r : records)
        for (const auto& [slot, regret] : r.checkpoints)
            out << r.run_id << ',' << slot << ',' << format_double(regret) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::vector<RunRecord> read_runs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<RunRecord> records;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::stringstream ss(line);
        std::string id_s, slot_s, regret_s;
        if (!std::getline(ss, id_s, ',') || !std::getline(ss, slot_s, ',') ||
            !std::getline(ss, regret_s))
            throw IoError("malformed runs CSV line: " + line);
        const int id = std::stoi(id_s);
        if (records.empty() || records.back().run_id != id) {
            records.emplace_back();
            records.back().run_id = id;
        }
        records.back().checkpoints.emplace_back(std::stol(slot_s), std::stod(regret_s));
    }
    for (RunRecord& r : records)
        if (!r.checkpoints.empty()) r.final_regret = r.checkpoints.back().second;
    return records;
}

void write_aggregate_csv(const AggregateCurve& curve, const std::string& path) {
    if (curve.slots.empty()) throw IoError("write_aggregate_csv: empty curve");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "# ci: normal approximation, mean +/- 1.96*sd/sqrt(runs); runs=" << curve.runs
        << (curve.ci_defined ? "" : "; ci=absent") << '\n';
    out << "slot,mean,lower95,upper95\n";
    for (std::size_t i = 0; i < curve.slots.size(); ++i) {
        out << curve.slots[i] << ',' << format_double(curve.mean[i]) << ',';
        if (curve.ci_defined)
            out << format_double(curve.lower95[i]) << ',' << format_double(curve.upper95[i]);
        else
            out << ',';
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace mmab
