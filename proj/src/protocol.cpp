#include "mmab/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmab/signaling.hpp"

namespace mmab {

namespace {

constexpr long kMaxSlots = std::numeric_limits<long>::max() / 4;

std::vector<int> remove_arm(std::vector<int> arms, int arm) {
    arms.erase(std::remove(arms.begin(), arms.end(), arm), arms.end());
    return arms;
}

int position_in(const std::vector<int>& arms, int arm) {
    return static_cast<int>(std::find(arms.begin(), arms.end(), arm) - arms.begin());
}

} // namespace

long ceil_slots(double x) {
    if (!(x < static_cast<double>(kMaxSlots))) return kMaxSlots;
    return static_cast<long>(std::ceil(x));
}

long fga_explore_len(int num_arms, int phase, double delta) {
    return ceil_slots(6.0 * num_arms * std::ldexp(1.0, phase) * std::log(2.0 / delta));
}

long fga_confirm_len(int num_arms, int phase, double delta) {
    return ceil_slots(static_cast<double>(num_arms) * std::ldexp(1.0, phase) *
                      std::log(2.0 / delta));
}

long de_explore_len(int num_active_arms, int phase, double delta) {
    const double per_arm = std::ldexp(1.0, phase) * std::ceil(std::log(1.0 / delta));
    return ceil_slots(static_cast<double>(num_active_arms) * per_arm);
}

int message_bits_for_phase(int phase) { return 3 + (phase + 1) / 2; }

int list_message_bits(int num_active_arms) {
    return static_cast<int>(std::bit_width(static_cast<unsigned>(num_active_arms)));
}

double run_confidence(long horizon) {
    if (horizon < 2) return 0.5;
    return 1.0 / (static_cast<double>(horizon) * std::log(static_cast<double>(horizon)));
}

int park_arm(int channel) { return channel == 1 ? 2 : 1; }

double confidence_radius(long pulls, int phase, double delta) {
    if (pulls < 1) throw std::invalid_argument("confidence_radius: need pulls >= 1");
    return std::sqrt(2.0 * std::log(1.0 / delta) / static_cast<double>(pulls)) +
           std::exp2(-0.5 * phase - 3.0);
}

AcceptReject leader_accept_reject(const std::vector<double>& rho,
                                  const std::vector<double>& radius,
                                  const std::vector<int>& active_arms, int m_active) {
    AcceptReject out;
    const int needed_below = static_cast<int>(active_arms.size()) - m_active;
    for (int k : active_arms) {
        const std::size_t ka = static_cast<std::size_t>(k);
        int dominated_by_k = 0;
        int dominating_k = 0;
        for (int i : active_arms) {
            const std::size_t ia = static_cast<std::size_t>(i);
            if (rho[ka] - radius[ka] >= rho[ia] + radius[ia]) ++dominated_by_k;
            if (rho[ia] - radius[ia] >= rho[ka] + radius[ka]) ++dominating_k;
        }
        if (dominated_by_k >= needed_below) out.accepted.push_back(k);
        if (dominating_k >= m_active) out.rejected.push_back(k);
    }
    return out; // active_arms is ascending, so both lists already are
}

int follower_claim_position(int m_active, int rank, int accepted_count) {
    const int pos = m_active - rank + 1;
    return (pos >= 1 && pos <= accepted_count) ? pos : 0;
}

// ---- stage 1: find a good arm ----

Task<GoodArmResult> find_good_arm(PlayerIo& io, int num_arms, double delta) {
    const std::size_t n = static_cast<std::size_t>(num_arms) + 1;
    std::vector<double> reward(n);
    std::vector<long> samples(n);
    for (int phase = 1;; ++phase) {
        std::fill(reward.begin(), reward.end(), 0.0);
        std::fill(samples.begin(), samples.end(), 0L);

        // sub-phase 1: uniform exploration
        const long explore = fga_explore_len(num_arms, phase, delta);
        for (long t = 0; t < explore; ++t) {
            const int k = 1 + static_cast<int>(io.rng().below(static_cast<std::uint64_t>(num_arms)));
            const double r = co_await io.pull(k);
            reward[static_cast<std::size_t>(k)] += r;
            samples[static_cast<std::size_t>(k)] += 1;
        }

        // sub-phase 2: one confirmation window per arm. A player that
        // accepted the arm samples uniformly and confirms on any nonzero
        // reward from it; a player that rejected it squats on the arm,
        // colliding away everyone else's confirmation. Window boundaries are
        // identical across players, so confirmers exit on the same slot.
        const long confirm = fga_confirm_len(num_arms, phase, delta);
        const double threshold = std::ldexp(1.0, 1 - phase);
        for (int cand = 1; cand <= num_arms; ++cand) {
            const std::size_t ca = static_cast<std::size_t>(cand);
            const bool accepted =
                samples[ca] > 0 && reward[ca] / static_cast<double>(samples[ca]) >= threshold;
            if (accepted) {
                double confirm_reward = 0.0;
                for (long t = 0; t < confirm; ++t) {
                    const int k =
                        1 + static_cast<int>(io.rng().below(static_cast<std::uint64_t>(num_arms)));
                    const double r = co_await io.pull(k);
                    if (k == cand) confirm_reward += r;
                }
                if (confirm_reward >= 1.0)
                    co_return GoodArmResult{cand, std::ldexp(1.0, -phase)};
            } else {
                for (long t = 0; t < confirm; ++t) co_await io.pull(cand);
            }
        }
    }
}

// ---- stage 2: external rank via musical chairs on virtual slots ----

Task<int> virtual_musical_chairs(PlayerIo& io, int num_arms, int channel, long tau) {
    int seat = -1;   // 0-based virtual slot once claimed
    int target = 0;
    const int park = park_arm(channel);
    const long total = ceil_slots(static_cast<double>(num_arms) * static_cast<double>(tau));
    for (long t = 0; t < total; ++t) {
        const int offset = static_cast<int>(t % num_arms);
        if (offset == 0)
            target = seat >= 0
                         ? seat
                         : static_cast<int>(io.rng().below(static_cast<std::uint64_t>(num_arms)));
        if (offset == target) {
            const double r = co_await io.pull(channel);
            if (r > 0.0 && seat < 0) seat = target;
        } else {
            co_await io.pull(park);
        }
    }
    co_return seat < 0 ? -1 : seat + 1;
}

// ---- stage 3: player count and internal rank ----

Task<CountResult> virtual_number_players(PlayerIo& io, int num_arms, int channel,
                                         int ext_rank, long tau) {
    CountResult result;
    int slot = ext_rank - 1; // 0-based virtual slot
    const int park = park_arm(channel);
    for (int round = 1; round <= 2 * num_arms; ++round) {
        if (round > 2 * ext_rank) slot = (slot + 1) % num_arms;
        double own_window = 0.0;
        for (int offset = 0; offset < num_arms; ++offset) {
            if (offset == slot) {
                for (long t = 0; t < tau; ++t) {
                    const double r = co_await io.pull(channel);
                    own_window += r;
                }
                // an all-zero window means someone shared this virtual slot
                if (own_window == 0.0) {
                    result.m_hat += 1;
                    if (round <= 2 * ext_rank) result.int_rank += 1;
                }
            } else {
                for (long t = 0; t < tau; ++t) co_await io.pull(park);
            }
        }
    }
    co_return result;
}

// ---- stage 4: distributed exploration with leader/follower exchange ----

namespace {

struct ComResult {
    int assigned_arm = -1;
    bool corrupt = false;
    int new_m_active = 0;
    std::vector<int> new_active;
};

// Per-player estimate table kept by the leader, indexed [arm][player rank].
struct LeaderBook {
    LeaderBook(int num_arms, int num_players)
        : mean(static_cast<std::size_t>(num_arms) + 1,
               std::vector<double>(static_cast<std::size_t>(num_players) + 1, 0.0)),
          pulls(static_cast<std::size_t>(num_arms) + 1,
                std::vector<long>(static_cast<std::size_t>(num_players) + 1, 0)) {}
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<long>> pulls;
};

Task<void> send_bits(PlayerIo& io, BitMessage msg, CodecParams params) {
    const std::vector<int> schedule = encode_schedule(msg, params);
    for (int arm : schedule) co_await io.pull(arm);
}

Task<BitMessage> receive_bits(PlayerIo& io, int channel, long tau, int q_bits) {
    std::vector<double> rewards;
    rewards.reserve(static_cast<std::size_t>(tau) * static_cast<std::size_t>(q_bits));
    const long total = tau * q_bits;
    for (long t = 0; t < total; ++t) {
        const double r = co_await io.pull(channel);
        rewards.push_back(r);
    }
    co_return decode_window(rewards, tau);
}

Task<void> park_for(PlayerIo& io, long slots, int arm) {
    for (long t = 0; t < slots; ++t) co_await io.pull(arm);
}

std::vector<int> codec_park_set(const std::vector<int>& active, int channel) {
    std::vector<int> park = remove_arm(active, channel);
    if (park.empty()) park.push_back(park_arm(channel));
    return park;
}

Task<ComResult> com_round_leader(PlayerIo& io, LeaderBook& book, const std::vector<int>& active,
                                 int m_active, int phase, int q_bits,
                                 const ExplorationParams& params,
                                 const std::vector<double>& own_estimate,
                                 ExplorationTrace* trace) {
    const long phase_pulls =
        ceil_slots(std::ldexp(1.0, phase) * std::ceil(std::log(1.0 / params.delta)));

    // the leader's own samples enter the book unquantized as player 1
    for (int arm : active) {
        const std::size_t a = static_cast<std::size_t>(arm);
        book.mean[a][1] = own_estimate[a];
        book.pulls[a][1] += phase_pulls;
    }

    // active followers report in rank order, one quantized estimate per
    // active arm
    long bits_exchanged = 0;
    for (int sender = 2; sender <= m_active; ++sender) {
        for (int arm : active) {
            BitMessage bits = co_await receive_bits(io, params.channel, params.tau, q_bits);
            const std::size_t a = static_cast<std::size_t>(arm);
            const std::size_t s = static_cast<std::size_t>(sender);
            book.mean[a][s] = binary_to_float(bits);
            book.pulls[a][s] += phase_pulls;
            bits_exchanged += q_bits;
        }
    }

    // count-weighted aggregation over every player's (possibly frozen) stats
    std::vector<double> rho(book.mean.size(), 0.0);
    std::vector<double> radius(book.mean.size(), 0.0);
    for (int arm : active) {
        const std::size_t a = static_cast<std::size_t>(arm);
        double weighted = 0.0;
        long total = 0;
        for (int i = 1; i <= params.m_hat; ++i) {
            const std::size_t ia = static_cast<std::size_t>(i);
            weighted += book.mean[a][ia] * static_cast<double>(book.pulls[a][ia]);
            total += book.pulls[a][ia];
        }
        rho[a] = total > 0 ? weighted / static_cast<double>(total) : 0.0;
        radius[a] = confidence_radius(std::max(total, 1L), phase, params.delta);
    }
    AcceptReject lists = leader_accept_reject(rho, radius, active, m_active);

    // broadcast list sizes, then contents (as 0-based positions in the
    // shared ascending active list), once per active follower
    const int width = list_message_bits(static_cast<int>(active.size()));
    const CodecParams codec(params.channel, params.tau, width, codec_park_set(active, params.channel));
    for (int receiver = 2; receiver <= m_active; ++receiver) {
        co_await send_bits(io, int_to_binary(lists.accepted.size(), width), codec);
        co_await send_bits(io, int_to_binary(lists.rejected.size(), width), codec);
        bits_exchanged += 2 * width;
    }
    for (int receiver = 2; receiver <= m_active; ++receiver) {
        for (int arm : lists.accepted) {
            co_await send_bits(
                io, int_to_binary(static_cast<std::uint64_t>(position_in(active, arm)), width),
                codec);
            bits_exchanged += width;
        }
        for (int arm : lists.rejected) {
            co_await send_bits(
                io, int_to_binary(static_cast<std::uint64_t>(position_in(active, arm)), width),
                codec);
            bits_exchanged += width;
        }
    }

    if (trace)
        trace->push_back({phase, static_cast<int>(active.size()), m_active, bits_exchanged,
                          lists.accepted, lists.rejected});

    // the good arm is reserved for the leader: followers consume the
    // stripped list, the leader finishes on the last accepted arm or on the
    // good arm itself
    const std::vector<int> stripped = remove_arm(lists.accepted, params.channel);
    const bool channel_accepted = stripped.size() != lists.accepted.size();

    ComResult out;
    if (!channel_accepted && static_cast<int>(lists.accepted.size()) == m_active) {
        out.assigned_arm = lists.accepted.back();
        co_return out;
    }
    if (channel_accepted && static_cast<int>(stripped.size()) == m_active - 1) {
        out.assigned_arm = params.channel;
        co_return out;
    }
    out.new_m_active = std::max(1, m_active - static_cast<int>(stripped.size()));
    out.new_active = active;
    for (int arm : stripped) out.new_active = remove_arm(std::move(out.new_active), arm);
    for (int arm : lists.rejected) out.new_active = remove_arm(std::move(out.new_active), arm);
    co_return out;
}

Task<ComResult> com_round_follower(PlayerIo& io, const std::vector<double>& own_estimate,
                                   int rank, const std::vector<int>& active, int m_active,
                                   int q_bits, const ExplorationParams& params) {
    const std::vector<int> off_channel = codec_park_set(active, params.channel);
    const int park = off_channel[static_cast<std::size_t>(rank) % off_channel.size()];
    const CodecParams codec(params.channel, params.tau, q_bits, off_channel);

    // upload windows, one per active follower in rank order
    for (int sender = 2; sender <= m_active; ++sender) {
        if (sender == rank) {
            for (int arm : active)
                co_await send_bits(
                    io, float_to_binary(own_estimate[static_cast<std::size_t>(arm)], q_bits),
                    codec);
        } else {
            co_await park_for(
                io, static_cast<long>(active.size()) * params.tau * q_bits, park);
        }
    }

    // list sizes
    const int width = list_message_bits(static_cast<int>(active.size()));
    std::uint64_t n_accepted = 0;
    std::uint64_t n_rejected = 0;
    for (int receiver = 2; receiver <= m_active; ++receiver) {
        if (receiver == rank) {
            const BitMessage acc_bits = co_await receive_bits(io, params.channel, params.tau, width);
            const BitMessage rej_bits = co_await receive_bits(io, params.channel, params.tau, width);
            n_accepted = binary_to_int(acc_bits);
            n_rejected = binary_to_int(rej_bits);
        } else {
            co_await park_for(io, 2L * params.tau * width, park);
        }
    }
    bool corrupt = n_accepted > active.size() || n_rejected > active.size();

    // list contents; every follower learned the sizes in its own window, so
    // the parking lengths stay aligned
    std::vector<int> accepted;
    std::vector<int> rejected;
    for (int receiver = 2; receiver <= m_active; ++receiver) {
        if (receiver == rank) {
            for (std::uint64_t q = 0; q < n_accepted + n_rejected; ++q) {
                const BitMessage pos_bits =
                    co_await receive_bits(io, params.channel, params.tau, width);
                const std::uint64_t pos = binary_to_int(pos_bits);
                if (pos >= active.size()) {
                    corrupt = true;
                    continue;
                }
                const int arm = active[static_cast<std::size_t>(pos)];
                (q < n_accepted ? accepted : rejected).push_back(arm);
            }
        } else {
            co_await park_for(
                io, static_cast<long>(n_accepted + n_rejected) * params.tau * width, park);
        }
    }

    ComResult out;
    if (corrupt) {
        out.corrupt = true;
        co_return out;
    }

    const std::vector<int> stripped = remove_arm(accepted, params.channel);
    const int claim =
        follower_claim_position(m_active, rank, static_cast<int>(stripped.size()));
    if (claim > 0) {
        out.assigned_arm = stripped[static_cast<std::size_t>(claim) - 1];
        co_return out;
    }
    out.new_m_active = m_active - static_cast<int>(stripped.size());
    out.new_active = active;
    for (int arm : stripped) out.new_active = remove_arm(std::move(out.new_active), arm);
    for (int arm : rejected) out.new_active = remove_arm(std::move(out.new_active), arm);
    co_return out;
}

} // namespace

Task<int> distributed_exploration(PlayerIo& io, ExplorationParams params,
                                  ExplorationTrace* trace) {
    const int num_arms = params.num_arms;
    const bool leader = params.int_rank == 1;
    const std::size_t n = static_cast<std::size_t>(num_arms) + 1;
    std::vector<double> reward(n, 0.0);
    std::vector<long> pulls(n, 0);
    std::vector<double> estimate(n, 0.0);
    LeaderBook book(leader ? num_arms : 0, leader ? params.m_hat : 0);

    std::vector<int> active(static_cast<std::size_t>(num_arms));
    for (int k = 1; k <= num_arms; ++k) active[static_cast<std::size_t>(k) - 1] = k;
    int m_active = params.m_hat;

    for (int phase = 1;; ++phase) {
        // sub-phase 1: rank-offset sequential hopping; with internal ranks
        // {1..M'} and M' <= |active| no two active players ever meet
        const long len = de_explore_len(static_cast<int>(active.size()), phase, params.delta);
        int idx = params.int_rank % static_cast<int>(active.size());
        for (long t = 0; t < len; ++t) {
            idx = (idx + 1) % static_cast<int>(active.size());
            const int arm = active[static_cast<std::size_t>(idx)];
            const double r = co_await io.pull(arm);
            const std::size_t a = static_cast<std::size_t>(arm);
            reward[a] += r;
            pulls[a] += 1;
            estimate[a] = reward[a] / static_cast<double>(pulls[a]);
        }

        // sub-phase 2: exchange estimates, classify, assign
        const int q_bits = message_bits_for_phase(phase);
        ComResult com;
        if (leader) {
            com = co_await com_round_leader(io, book, active, m_active, phase, q_bits, params,
                                            estimate, trace);
        } else {
            com = co_await com_round_follower(io, estimate, params.int_rank, active, m_active,
                                              q_bits, params);
        }
        if (com.corrupt) co_return -1;
        if (com.assigned_arm > 0) co_return com.assigned_arm;
        active = std::move(com.new_active);
        m_active = com.new_m_active;
        // a follower that outranks the active count yet holds no arm means
        // the exchange went inconsistent somewhere
        if (active.empty() || m_active < 1 || (!leader && params.int_rank > m_active))
            co_return -1;
    }
}

// ---- the full pipeline ----

namespace {

Task<void> drift_forever(PlayerIo& io, int num_arms) {
    for (;;) {
        const int k = 1 + static_cast<int>(io.rng().below(static_cast<std::uint64_t>(num_arms)));
        co_await io.pull(k);
    }
}

} // namespace

Task<void> full_algorithm(PlayerIo& io, int num_arms, long horizon, PlayerProgress& progress) {
    const double delta = run_confidence(horizon);
    progress = PlayerProgress{};

    const GoodArmResult good = co_await find_good_arm(io, num_arms, delta);
    progress.good_arm = good.arm;
    progress.mu_lower = good.mu_lower;
    progress.fga_exit_slot = io.pulls_completed();
    progress.stage = Stage::MusicalChairs;

    const double log_term = std::log(1.0 / delta);
    const long chairs_tau = ceil_slots(num_arms * log_term / good.mu_lower);
    const int ext_rank = co_await virtual_musical_chairs(io, num_arms, good.arm, chairs_tau);
    progress.vmc_exit_slot = io.pulls_completed();
    if (ext_rank < 1) {
        progress.stage = Stage::Failed;
        progress.fail = FailReason::Unseated;
        co_await drift_forever(io, num_arms);
    }
    progress.ext_rank = ext_rank;
    progress.stage = Stage::CountPlayers;

    const long tau = ceil_slots(log_term / good.mu_lower);
    const CountResult count =
        co_await virtual_number_players(io, num_arms, good.arm, ext_rank, tau);
    progress.m_hat = count.m_hat;
    progress.int_rank = count.int_rank;
    progress.vnp_exit_slot = io.pulls_completed();
    progress.stage = Stage::Explore;

    const int assigned = co_await distributed_exploration(
        io, ExplorationParams{num_arms, count.int_rank, count.m_hat, good.arm, tau, delta});
    progress.de_exit_slot = io.pulls_completed();
    if (assigned < 1) {
        progress.stage = Stage::Failed;
        progress.fail = FailReason::Corrupt;
        co_await drift_forever(io, num_arms);
    }
    progress.assigned_arm = assigned;
    progress.stage = Stage::Exploit;

    for (;;) co_await io.pull(assigned);
}

} // namespace mmab
