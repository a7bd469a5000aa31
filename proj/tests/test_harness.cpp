#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmab/harness.hpp"
#include "mmab/plot.hpp"

using namespace mmab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "mmab_harness_test";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_config(PolicyKind kind) {
    ExperimentConfig c;
    c.K = 3;
    c.M = 2;
    c.T = 20000;
    c.means = {1.0, 0.8, 0.1};
    c.runs = 2;
    c.master_seed = 11;
    c.policy = kind;
    c.checkpoints = 10;
    return c;
}

} // namespace

TEST_CASE("linear means profile") {
    ArmMeans m = linear_means(5, 1.0, 0.01);
    const std::vector<double> expected{1.0, 0.7525, 0.505, 0.2575, 0.01};
    REQUIRE(m.values().size() == expected.size());
    CHECK(m.values().front() == 1.0); // endpoints exact
    CHECK(m.values().back() == 0.01);
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(m.values()[i] == doctest::Approx(expected[i]).epsilon(1e-14));
    ArmMeans two = linear_means(2, 0.8, 0.2);
    CHECK(two.values() == std::vector<double>{0.8, 0.2});
    ArmMeans flat = linear_means(4, 0.5, 0.5);
    CHECK(flat.values() == std::vector<double>(4, 0.5));
    CHECK_THROWS_AS(linear_means(1, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(linear_means(3, 0.2, 0.8), ConfigError);
}

TEST_CASE("aggregate mean and confidence half-width") {
    std::vector<RunRecord> records(3);
    const double values[3] = {10.0, 12.0, 14.0};
    for (int i = 0; i < 3; ++i) {
        records[i].run_id = i;
        records[i].checkpoints = {{100, values[i]}};
    }
    AggregateCurve curve = aggregate(records);
    REQUIRE(curve.ci_defined);
    CHECK(curve.mean[0] == doctest::Approx(12.0).epsilon(1e-12));
    const double half = 1.96 * 2.0 / std::sqrt(3.0);
    CHECK(curve.upper95[0] - curve.mean[0] == doctest::Approx(half).epsilon(1e-9));
    CHECK(curve.mean[0] - curve.lower95[0] == doctest::Approx(half).epsilon(1e-9));
}

TEST_CASE("aggregate of identical values has zero width") {
    std::vector<RunRecord> records(4);
    for (int i = 0; i < 4; ++i) records[i].checkpoints = {{10, 5.5}, {20, 7.5}};
    AggregateCurve curve = aggregate(records);
    for (std::size_t i = 0; i < curve.slots.size(); ++i) {
        CHECK(curve.lower95[i] == curve.mean[i]);
        CHECK(curve.upper95[i] == curve.mean[i]);
    }
}

TEST_CASE("single run leaves the CI flagged absent") {
    std::vector<RunRecord> records(1);
    records[0].checkpoints = {{10, 3.0}};
    AggregateCurve curve = aggregate(records);
    CHECK_FALSE(curve.ci_defined);
    CHECK(curve.mean[0] == 3.0);

    const fs::path p = temp_dir() / "single_agg.csv";
    write_aggregate_csv(curve, p.string());
    const std::string text = slurp(p);
    CHECK(text.find("ci=absent") != std::string::npos);
    CHECK(text.find("10,3,,") != std::string::npos); // CI columns left empty
}

TEST_CASE("oracle policy has exactly zero regret") {
    std::vector<RunRecord> records = run_experiment(small_config(PolicyKind::Oracle));
    REQUIRE(records.size() == 2);
    for (const RunRecord& r : records) {
        CHECK(r.success);
        CHECK(r.final_regret == 0.0);
        for (const auto& [slot, regret] : r.checkpoints) CHECK(regret == 0.0);
    }
}

TEST_CASE("uniform policy regret slope matches the closed form") {
    ExperimentConfig config = small_config(PolicyKind::Uniform);
    config.T = 100000;
    std::vector<RunRecord> records = run_experiment(config);
    const ArmMeans means = config.resolve_means();
    // expected collected reward per slot: M * avg_k rho_k
    double rho_avg = 0.0;
    for (int k = 1; k <= config.K; ++k)
        rho_avg += expected_uniform_reward(means, config.M, k) / config.K;
    const double slope = top_m_sum(means, config.M) - config.M * rho_avg;
    for (const RunRecord& r : records) {
        const double simulated = r.final_regret / static_cast<double>(config.T);
        CHECK(simulated == doctest::Approx(slope).epsilon(0.05));
        CHECK_FALSE(r.success);
    }
}

TEST_CASE("proposed policy settles in a small configuration") {
    std::vector<RunRecord> records = run_experiment(small_config(PolicyKind::Proposed));
    for (const RunRecord& r : records) {
        CHECK(r.success);
        CHECK(r.settled_slot > 0);
        CHECK(r.final_regret == r.regret_at_settle); // flat after assignment
    }
}

TEST_CASE("identical configs produce identical records") {
    const ExperimentConfig config = small_config(PolicyKind::Proposed);
    std::vector<RunRecord> a = run_experiment(config);
    std::vector<RunRecord> b = run_experiment(config);
    const fs::path pa = temp_dir() / "det_a.csv";
    const fs::path pb = temp_dir() / "det_b.csv";
    write_runs_csv(a, pa.string());
    write_runs_csv(b, pb.string());
    CHECK(slurp(pa) == slurp(pb));
}

TEST_CASE("checkpoint grid covers the horizon") {
    ExperimentConfig config = small_config(PolicyKind::Oracle);
    config.T = 1000;
    config.checkpoints = 4;
    std::vector<RunRecord> records = run_experiment(config);
    std::vector<long> slots;
    for (const auto& [slot, value] : records[0].checkpoints) slots.push_back(slot);
    CHECK(slots == std::vector<long>{250, 500, 750, 1000});
}

TEST_CASE("runs CSV reloads bit-exactly") {
    std::vector<RunRecord> records = run_experiment(small_config(PolicyKind::Proposed));
    const fs::path p = temp_dir() / "roundtrip_runs.csv";
    write_runs_csv(records, p.string());
    std::vector<RunRecord> reloaded = read_runs_csv(p.string());
    REQUIRE(reloaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        CHECK(reloaded[i].checkpoints == records[i].checkpoints);
    const AggregateCurve a = aggregate(records);
    const AggregateCurve b = aggregate(reloaded);
    CHECK(a.mean == b.mean);
    CHECK(a.lower95 == b.lower95);
    CHECK(a.upper95 == b.upper95);
}

TEST_CASE("config file parsing") {
    const fs::path p = temp_dir() / "exp.cfg";
    {
        std::ofstream out(p);
        out << "# comment line\n";
        out << "K = 5\n";
        out << "M = 2\n";
        out << "T = 1000\n";
        out << "runs = 3\n";
        out << "master_seed = 99\n";
        out << "policy = uniform\n";
        out << "checkpoints = 5\n";
        out << "mu_top = 0.9\n";
        out << "mu_bottom = 0.1\n";
        out << "output_path = /tmp/out\n";
    }
    ExperimentConfig config = parse_config_file(p.string());
    CHECK(config.K == 5);
    CHECK(config.M == 2);
    CHECK(config.T == 1000);
    CHECK(config.runs == 3);
    CHECK(config.master_seed == 99);
    CHECK(config.policy == PolicyKind::Uniform);
    CHECK(config.checkpoints == 5);
    CHECK(config.mu_top == 0.9);
    CHECK(config.mu_bottom == 0.1);
    CHECK(config.output_path == "/tmp/out");
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("explicit means list") {
    ExperimentConfig config;
    apply_config_entry(config, "means", "0.9, 0.5 ,0.1");
    CHECK(config.means == std::vector<double>{0.9, 0.5, 0.1});
    config.K = 3;
    config.M = 1;
    config.T = 10;
    CHECK_NOTHROW(config.validate());
    config.K = 4; // mismatched list length
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("config rejections") {
    ExperimentConfig config;
    CHECK_THROWS_AS(apply_config_entry(config, "bogus", "1"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(config, "K", "five"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(config, "policy", "greedy"), ConfigError);
    config = ExperimentConfig{};
    config.K = 3;
    config.M = 3; // M must stay below K
    config.T = 10;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config.M = 1;
    config.checkpoints = 1;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    CHECK_THROWS_AS(parse_config_file((temp_dir() / "missing.cfg").string()), ConfigError);
}

TEST_CASE("empty outputs are rejected without creating files") {
    const fs::path p = temp_dir() / "never_written.csv";
    CHECK_THROWS_AS(write_aggregate_csv(AggregateCurve{}, p.string()), IoError);
    CHECK_FALSE(fs::exists(p));
    const fs::path svg = temp_dir() / "never_written.svg";
    CHECK_THROWS_AS(emit_plot(AggregateCurve{}, svg.string(), "t"), IoError);
    CHECK_FALSE(fs::exists(svg));
}

TEST_CASE("plot emission") {
    std::vector<RunRecord> records = run_experiment(small_config(PolicyKind::Uniform));
    AggregateCurve curve = aggregate(records);
    const fs::path svg = temp_dir() / "curve.svg";
    emit_plot(curve, svg.string(), "uniform baseline");
    const std::string text = slurp(svg);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
    CHECK(text.find("polygon") != std::string::npos); // CI band present
    CHECK_THROWS_AS(emit_plot(curve, (temp_dir() / "curve.png").string(), "t"), ConfigError);
    CHECK_THROWS_AS(emit_plot(curve, "/nonexistent_dir_zz/x.svg", "t"), IoError);
}

TEST_CASE("seventeen significant digits reload exactly") {
    const double value = 12345.678901234567;
    const std::string s = format_double(value);
    CHECK(std::stod(s) == value);
    const double third = 1.0 / 3.0;
    CHECK(std::stod(format_double(third)) == third);
}
