#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>

#include "mmab/bandit_env.hpp"
#include "mmab/coro.hpp"
#include "mmab/protocol.hpp"

// Player-facing policy interface and the lockstep driver. A policy sees only
// its own rewards; the driver owns the environment.

namespace mmab {

class Policy {
public:
    virtual ~Policy() = default;
    virtual void reset(std::uint64_t seed, int num_arms, long horizon) = 0;
    // Arm to pull this slot, in 1..K.
    virtual int act(long slot) = 0;
    // Reward obtained for the arm returned by the last act().
    virtual void observe(double reward) = 0;
};

// The full four-stage protocol.
class ProposedPolicy final : public Policy {
public:
    void reset(std::uint64_t seed, int num_arms, long horizon) override {
        state_ = std::make_unique<State>();
        state_->io.seed(seed);
        state_->task = full_algorithm(state_->io, num_arms, horizon, state_->progress);
        state_->task.start();
    }
    int act(long) override { return state_->io.pending_arm(); }
    void observe(double reward) override {
        state_->io.deliver(reward);
        state_->task.check();
    }

    const PlayerProgress& progress() const { return state_->progress; }

private:
    // Heap-pinned: the coroutine frame holds references into it.
    struct State {
        PlayerIo io;
        PlayerProgress progress;
        Task<void> task;
    };
    std::unique_ptr<State> state_;
};

// Adapts one protocol routine (or a chain) to the Policy interface, for
// driving stages in isolation. After the routine returns, the player keeps
// repeating its last arm choice; drive with a stop condition.
class RoutinePolicy final : public Policy {
public:
    using Factory = std::function<Task<void>(PlayerIo&)>;

    explicit RoutinePolicy(Factory factory) : factory_(std::move(factory)) {}

    void reset(std::uint64_t seed, int, long) override {
        state_ = std::make_unique<State>();
        state_->io.seed(seed);
        state_->task = factory_(state_->io);
        state_->task.start();
    }
    int act(long) override { return state_->io.pending_arm(); }
    void observe(double reward) override {
        state_->io.deliver(reward);
        state_->task.check();
    }

    bool finished() const { return state_->task.done(); }
    long slots_run() const { return state_->io.pulls_completed(); }

private:
    struct State {
        PlayerIo io;
        Task<void> task;
    };
    Factory factory_;
    std::unique_ptr<State> state_;
};

// Always pulls one fixed arm (the per-player slice of the oracle play).
class PinnedPolicy final : public Policy {
public:
    explicit PinnedPolicy(int arm) : arm_(arm) {}
    void reset(std::uint64_t, int, long) override {}
    int act(long) override { return arm_; }
    void observe(double) override {}

private:
    int arm_;
};

// Independent uniform arm choice every slot.
class UniformPolicy final : public Policy {
public:
    void reset(std::uint64_t seed, int num_arms, long) override {
        rng_.seed(seed);
        num_arms_ = num_arms;
    }
    int act(long) override {
        return 1 + static_cast<int>(rng_.below(static_cast<std::uint64_t>(num_arms_)));
    }
    void observe(double) override {}

private:
    Rng rng_{0};
    int num_arms_ = 2;
};

// Run players against the environment in lockstep for up to `max_slots`
// slots (or until `stop` returns true, checked after each slot). Returns the
// number of slots executed.
long drive_lockstep(Environment& env, std::span<Policy* const> players, long max_slots,
                    const std::function<bool()>& stop = {});

} // namespace mmab
