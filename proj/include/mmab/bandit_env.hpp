#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

// Slotted multi-player Bernoulli bandit without collision sensing.
//
// Per slot, every arm has a single Bernoulli draw shared by whoever pulls it.
// If two or more players pull the same arm, all of them receive 0 and nobody
// is told a collision happened; a lone player receives the arm's draw.
// Pseudo-regret is accounted against the sum of the M largest true means,
// using true means rather than realized rewards.

namespace mmab {

// True per-arm means, entries in [0,1], at least two arms.
class ArmMeans {
public:
    explicit ArmMeans(std::vector<double> means);

    int count() const { return static_cast<int>(means_.size()); }
    double mean(int arm) const { return means_[static_cast<std::size_t>(arm - 1)]; }
    const std::vector<double>& values() const { return means_; }
    // Means sorted in descending order (the order statistics).
    const std::vector<double>& sorted_desc() const { return sorted_; }

private:
    std::vector<double> means_;
    std::vector<double> sorted_;
};

// Sum of the M largest means; M = 0 yields 0.
double top_m_sum(const ArmMeans& means, int m);

// True iff at least two entries of `choices` equal `arm`. Internal helper for
// the environment and tests; players never see this.
bool collision_indicator(std::span<const int> choices, int arm);

// Expected reward of arm k for one player when all M players pick arms
// uniformly at random: (1 - 1/K)^(M-1) * mu_k. Used by test oracles.
double expected_uniform_reward(const ArmMeans& means, int m, int arm);

struct RegretLedger {
    double cumulative = 0.0;
    std::vector<std::pair<long, double>> checkpoints;
};

class Environment {
public:
    // 1 <= num_players < K, all means in [0,1]. Rewards are a deterministic
    // function of (seed, slot, arm).
    Environment(ArmMeans means, int num_players, std::uint64_t seed);

    int num_arms() const { return arms_.count(); }
    int num_players() const { return players_; }
    long slot() const { return slot_; }
    const ArmMeans& arms() const { return arms_; }

    // Advance one slot. `choices` holds one arm index in 1..K per player.
    // Returns per-player rewards; the buffer is reused across calls.
    const std::vector<double>& step(std::span<const int> choices);

    const RegretLedger& ledger() const { return ledger_; }
    double cumulative_regret() const { return ledger_.cumulative; }
    // Append (current slot, cumulative regret) to the ledger's checkpoints.
    void mark_checkpoint();

private:
    double draw(int arm) const;

    ArmMeans arms_;
    int players_;
    long slot_ = 0;
    std::uint64_t seed_;
    RegretLedger ledger_;
    std::vector<double> rewards_;
    std::vector<int> pull_count_;
    std::vector<double> chosen_means_;
};

} // namespace mmab
