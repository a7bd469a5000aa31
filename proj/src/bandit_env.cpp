#include "mmab/bandit_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmab/rng.hpp"

namespace mmab {

ArmMeans::ArmMeans(std::vector<double> means) : means_(std::move(means)) {
    if (means_.size() < 2)
        throw std::invalid_argument("ArmMeans: need at least 2 arms");
    for (double mu : means_) {
        if (!(mu >= 0.0 && mu <= 1.0))
            throw std::invalid_argument("ArmMeans: mean outside [0,1]");
    }
    sorted_ = means_;
    std::sort(sorted_.begin(), sorted_.end(), std::greater<>());
}

double top_m_sum(const ArmMeans& means, int m) {
    if (m < 0 || m > means.count())
        throw std::invalid_argument("top_m_sum: M out of range");
    double sum = 0.0;
    for (int i = 0; i < m; ++i) sum += means.sorted_desc()[static_cast<std::size_t>(i)];
    return sum;
}

bool collision_indicator(std::span<const int> choices, int arm) {
    int hits = 0;
    for (int c : choices) {
        if (c == arm && ++hits >= 2) return true;
    }
    return false;
}

double expected_uniform_reward(const ArmMeans& means, int m, int arm) {
    if (arm < 1 || arm > means.count())
        throw std::invalid_argument("expected_uniform_reward: bad arm index");
    const double k = static_cast<double>(means.count());
    return std::pow(1.0 - 1.0 / k, m - 1) * means.mean(arm);
}

Environment::Environment(ArmMeans means, int num_players, std::uint64_t seed)
    : arms_(std::move(means)), players_(num_players), seed_(seed) {
    if (num_players < 1 || num_players >= arms_.count())
        throw std::invalid_argument("Environment: need 1 <= M < K");
    rewards_.resize(static_cast<std::size_t>(players_));
    pull_count_.resize(static_cast<std::size_t>(arms_.count() + 1));
    chosen_means_.reserve(static_cast<std::size_t>(players_));
}

double Environment::draw(int arm) const {
    const double u = keyed_uniform(seed_, static_cast<std::uint64_t>(slot_),
                                   static_cast<std::uint64_t>(arm));
    return u < arms_.mean(arm) ? 1.0 : 0.0;
}

const std::vector<double>& Environment::step(std::span<const int> choices) {
    if (static_cast<int>(choices.size()) != players_)
        throw std::invalid_argument("Environment::step: need exactly M choices");
    for (int c : choices) {
        if (c < 1 || c > arms_.count())
            throw std::out_of_range("Environment::step: arm index out of range");
    }

    std::fill(pull_count_.begin(), pull_count_.end(), 0);
    for (int c : choices) ++pull_count_[static_cast<std::size_t>(c)];

    chosen_means_.clear();
    for (int m = 0; m < players_; ++m) {
        const int arm = choices[static_cast<std::size_t>(m)];
        if (pull_count_[static_cast<std::size_t>(arm)] >= 2) {
            rewards_[static_cast<std::size_t>(m)] = 0.0;
        } else {
            rewards_[static_cast<std::size_t>(m)] = draw(arm);
            chosen_means_.push_back(arms_.mean(arm));
        }
    }

    // Increment = sum_m (mu_(m) - collected_(m)) with both sides sorted
    // descending; pairing the order statistics makes the increment exactly
    // 0.0 whenever the chosen set attains the top-M sum (ties included).
    std::sort(chosen_means_.begin(), chosen_means_.end(), std::greater<>());
    double inc = 0.0;
    for (int m = 0; m < players_; ++m) {
        const double best = arms_.sorted_desc()[static_cast<std::size_t>(m)];
        const double got =
            m < static_cast<int>(chosen_means_.size()) ? chosen_means_[static_cast<std::size_t>(m)] : 0.0;
        inc += best - got;
    }
    ledger_.cumulative += inc;
    slot_ += 1;
    return rewards_;
}

void Environment::mark_checkpoint() {
    ledger_.checkpoints.emplace_back(slot_, ledger_.cumulative);
}

} // namespace mmab
