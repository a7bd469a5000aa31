#include "mmab/signaling.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmab {

CodecParams::CodecParams(int channel_arm, long tau, int message_bits, std::vector<int> park_set)
    : channel_arm(channel_arm), tau(tau), message_bits(message_bits), park_set(std::move(park_set)) {
    if (tau < 1) throw std::invalid_argument("CodecParams: tau must be >= 1");
    if (message_bits < 1) throw std::invalid_argument("CodecParams: Q must be >= 1");
    if (std::find(this->park_set.begin(), this->park_set.end(), channel_arm) != this->park_set.end())
        throw std::invalid_argument("CodecParams: park_set must exclude the channel arm");
}

BitMessage float_to_binary(double mu, int q_bits) {
    if (!(mu >= 0.0 && mu <= 1.0))
        throw std::invalid_argument("float_to_binary: mu outside [0,1]");
    if (q_bits < 1) throw std::invalid_argument("float_to_binary: Q must be >= 1");
    BitMessage bits(static_cast<std::size_t>(q_bits), 0);
    if (mu == 1.0) {
        std::fill(bits.begin(), bits.end(), std::uint8_t{1});
        return bits;
    }
    double rest = mu;
    double weight = 0.5;
    for (auto& b : bits) {
        if (rest >= weight) {
            b = 1;
            rest -= weight;
        }
        weight *= 0.5;
    }
    return bits;
}

double binary_to_float(const BitMessage& bits) {
    double value = 0.0;
    double weight = 0.5;
    for (std::uint8_t b : bits) {
        if (b) value += weight;
        weight *= 0.5;
    }
    return value;
}

BitMessage int_to_binary(std::uint64_t n, int q_bits) {
    if (q_bits < 1 || q_bits > 63)
        throw std::invalid_argument("int_to_binary: Q out of range");
    if (n >= (std::uint64_t{1} << q_bits))
        throw std::invalid_argument("int_to_binary: value does not fit in Q bits");
    BitMessage bits(static_cast<std::size_t>(q_bits), 0);
    for (int q = 0; q < q_bits; ++q)
        bits[static_cast<std::size_t>(q)] =
            static_cast<std::uint8_t>((n >> (q_bits - 1 - q)) & 1u);
    return bits;
}

std::uint64_t binary_to_int(const BitMessage& bits) {
    std::uint64_t n = 0;
    for (std::uint8_t b : bits) n = (n << 1) | (b ? 1u : 0u);
    return n;
}

std::vector<int> encode_schedule(const BitMessage& msg, const CodecParams& params) {
    std::vector<int> choices;
    choices.reserve(msg.size() * static_cast<std::size_t>(params.tau));
    for (std::size_t qi = 0; qi < msg.size(); ++qi) {
        int arm;
        if (msg[qi]) {
            if (params.park_set.empty())
                throw std::invalid_argument("encode_schedule: 1-bit needs a nonempty park_set");
            // bit counter starts at 1 in the schedule definition
            const std::size_t pos = (qi + 1) % params.park_set.size();
            arm = params.park_set[pos];
        } else {
            arm = params.channel_arm;
        }
        choices.insert(choices.end(), static_cast<std::size_t>(params.tau), arm);
    }
    return choices;
}

BitMessage decode_window(std::span<const double> rewards, long tau) {
    if (tau < 1) throw std::invalid_argument("decode_window: tau must be >= 1");
    if (rewards.size() % static_cast<std::size_t>(tau) != 0)
        throw std::invalid_argument("decode_window: reward count not a multiple of tau");
    const std::size_t q_bits = rewards.size() / static_cast<std::size_t>(tau);
    BitMessage bits(q_bits, 0);
    for (std::size_t q = 0; q < q_bits; ++q) {
        for (long t = 0; t < tau; ++t) {
            if (rewards[q * static_cast<std::size_t>(tau) + static_cast<std::size_t>(t)] > 0.0) {
                bits[q] = 1;
                break;
            }
        }
    }
    return bits;
}

} // namespace mmab
