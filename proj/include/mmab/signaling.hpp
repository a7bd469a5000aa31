#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Forced-collision bit signaling over a shared good arm.
//
// A sender transmits one bit per tau slots: for a 0-bit it sits on the
// channel arm, colliding with the receiver so every reward the receiver sees
// is 0; for a 1-bit it parks elsewhere, so the receiver observes the channel
// arm's own Bernoulli draws and decodes 1 on the first nonzero reward.
// A 0-bit therefore can never be mis-decoded; a 1-bit is missed with
// probability (1 - mu)^tau.
//
// These functions are pure schedule generators/parsers; pulling the arms is
// the protocol layer's job.

namespace mmab {

using BitMessage = std::vector<std::uint8_t>;

struct CodecParams {
    int channel_arm;            // the good arm used as the channel
    long tau;                   // slots per bit
    int message_bits;           // Q
    std::vector<int> park_set;  // ordered arms a 1-bit sender may sit on; excludes channel_arm

    CodecParams(int channel_arm, long tau, int message_bits, std::vector<int> park_set);
};

// Truncated binary expansion of mu in [0,1] to Q bits, most significant
// (weight 1/2) first; sum_q bits[q] 2^-(q+1) <= mu, error < 2^-Q.
// mu = 1.0 saturates to all ones (error still <= 2^-Q).
BitMessage float_to_binary(double mu, int q_bits);

// sum_q bits[q] 2^-(q+1).
double binary_to_float(const BitMessage& bits);

// Big-endian binary encoding of n, 0 <= n < 2^Q. Exact bijection with
// binary_to_int.
BitMessage int_to_binary(std::uint64_t n, int q_bits);

std::uint64_t binary_to_int(const BitMessage& bits);

// Per-slot arm choices of a sender transmitting `msg`: tau * Q entries.
// Bit q = 0: the channel arm (jam); bit q = 1: the (q mod |park_set|)-th
// park arm, counting q from 1 as the schedule does.
std::vector<int> encode_schedule(const BitMessage& msg, const CodecParams& params);

// Rewards a receiver observed while pulling the channel arm for tau * Q
// slots; bit q decodes to 1 iff any of its tau rewards is nonzero.
BitMessage decode_window(std::span<const double> rewards, long tau);

} // namespace mmab
