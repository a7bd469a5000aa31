#include "mmab/policy.hpp"

#include <vector>

namespace mmab {

long drive_lockstep(Environment& env, std::span<Policy* const> players, long max_slots,
                    const std::function<bool()>& stop) {
    std::vector<int> choices(players.size());
    long executed = 0;
    for (long t = 1; t <= max_slots; ++t) {
        for (std::size_t m = 0; m < players.size(); ++m) choices[m] = players[m]->act(t);
        const std::vector<double>& rewards = env.step(choices);
        for (std::size_t m = 0; m < players.size(); ++m) players[m]->observe(rewards[m]);
        ++executed;
        if (stop && stop()) break;
    }
    return executed;
}

} // namespace mmab
