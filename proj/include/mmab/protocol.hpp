#pragma once

#include <cstdint>
#include <vector>

#include "mmab/coro.hpp"

// Decentralized four-stage protocol, per player:
//
//   1. find_good_arm      — agree on one arm with mean >= mu_(1)/8 plus a
//                           lower bound on it, by phased uniform exploration
//                           and a jamming-based confirmation round.
//   2. virtual_musical_chairs — musical chairs over K virtual time slots of
//                           the good arm; yields a distinct external rank.
//   3. virtual_number_players — sequential hopping over the virtual slots;
//                           counts players and yields the internal rank.
//   4. distributed_exploration — rank-offset hopping over active arms plus a
//                           leader/follower exchange of quantized estimates
//                           over the good arm, eliminating or assigning arms
//                           until every player holds one of the M best.
//
// Every routine reads only its own PlayerIo (last reward + private random
// stream) and the shared constants; there is no channel to the environment
// or to other players other than the rewards themselves.

namespace mmab {

// ---- shared durations & widths (pure, unit-tested) ----

// Slots of uniform exploration in phase p of find_good_arm.
long fga_explore_len(int num_arms, int phase, double delta);
// Slots of one confirmation window (one per candidate arm) in phase p.
long fga_confirm_len(int num_arms, int phase, double delta);
// Slots of one exploration sub-phase of distributed_exploration.
long de_explore_len(int num_active_arms, int phase, double delta);
// Quantized-estimate message width for phase p: ceil(p/2 + 3).
int message_bits_for_phase(int phase);
// Width used for list sizes and list entries during the exchange. Sizes
// range over 0..n and 0-based positions over 0..n-1, so ceil(log2(n+1))
// bits cover both.
int list_message_bits(int num_active_arms);
// ceil(x) saturated to a safe slot count; protocol durations can outgrow
// any horizon in late phases and are truncated by the driver anyway.
long ceil_slots(double x);
// Confidence parameter for a horizon-T run: 1/(T ln T).
double run_confidence(long horizon);
// Smallest arm index different from `channel` (the fixed parking spot).
int park_arm(int channel);

// ---- pure decision rules (unit-tested against hand-traced cases) ----

// sqrt(2 ln(1/delta) / t) + 2^(-p/2 - 3), t >= 1.
double confidence_radius(long pulls, int phase, double delta);

struct AcceptReject {
    std::vector<int> accepted; // ascending arm indices
    std::vector<int> rejected;
};

// Classify active arms from aggregated means rho and radii (indexed by arm).
// Accept k when it provably dominates at least |active| - m_active arms;
// reject k when at least m_active arms provably dominate it.
AcceptReject leader_accept_reject(const std::vector<double>& rho,
                                  const std::vector<double>& radius,
                                  const std::vector<int>& active_arms, int m_active);

// 1-based position in the stripped accepted list that follower `rank`
// claims, or 0 when the list is too short: position m_active - rank + 1.
int follower_claim_position(int m_active, int rank, int accepted_count);

// ---- protocol stages (coroutines over a PlayerIo) ----

struct GoodArmResult {
    int arm = -1;
    double mu_lower = 0.0;
};

struct CountResult {
    int m_hat = 1;
    int int_rank = 1;
};

struct ExplorationParams {
    int num_arms;
    int int_rank;
    int m_hat;
    int channel;  // the agreed good arm
    long tau;     // slots per transmitted bit
    double delta;
};

// Per-phase record of the leader's side of the exchange (optional tap for
// tests; pass nullptr otherwise).
struct ExplorationTraceEntry {
    int phase;
    int active_arms;
    int m_active;
    long bits_exchanged; // uploads received plus broadcasts sent
    std::vector<int> accepted;
    std::vector<int> rejected;
};
using ExplorationTrace = std::vector<ExplorationTraceEntry>;

Task<GoodArmResult> find_good_arm(PlayerIo& io, int num_arms, double delta);

// Returns the external rank in 1..K, or -1 if still unseated at exit.
// Runs exactly num_arms * tau slots.
Task<int> virtual_musical_chairs(PlayerIo& io, int num_arms, int channel, long tau);

// Runs exactly 2 * num_arms^2 * tau slots.
Task<CountResult> virtual_number_players(PlayerIo& io, int num_arms, int channel,
                                         int ext_rank, long tau);

// Returns the assigned arm in 1..K, or -1 on protocol corruption.
Task<int> distributed_exploration(PlayerIo& io, ExplorationParams params,
                                  ExplorationTrace* trace = nullptr);

// ---- the full pipeline ----

enum class Stage { FindGoodArm, MusicalChairs, CountPlayers, Explore, Exploit, Failed };
enum class FailReason { None, Unseated, Corrupt };

struct PlayerProgress {
    Stage stage = Stage::FindGoodArm;
    FailReason fail = FailReason::None;
    int good_arm = -1;
    double mu_lower = 0.0;
    long fga_exit_slot = -1;
    int ext_rank = -1;
    long vmc_exit_slot = -1;
    int m_hat = -1;
    int int_rank = -1;
    long vnp_exit_slot = -1;
    int assigned_arm = -1;
    long de_exit_slot = -1;
};

// Chain the four stages with delta = 1/(T ln T) and the tau values the
// pipeline prescribes, then exploit the assigned arm forever (the driver
// truncates at the horizon). On a stage failure the player falls back to
// uniform random play and flags the run via `progress`.
Task<void> full_algorithm(PlayerIo& io, int num_arms, long horizon, PlayerProgress& progress);

} // namespace mmab
