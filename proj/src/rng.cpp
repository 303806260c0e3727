#include "pexp/rng.hpp"

#include <cmath>

namespace pexp {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;
constexpr std::uint32_t kMultA = 0xD2511F53u;
constexpr std::uint32_t kMultB = 0xCD9E8D57u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) {
    std::uint64_t prod0 = static_cast<std::uint64_t>(kMultA) * ctr[0];
    std::uint64_t prod1 = static_cast<std::uint64_t>(kMultB) * ctr[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(prod1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(prod1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream_id) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    // counter = (block index, stream id); the block index lives in words 0-1.
    counter_ = {0u, 0u, static_cast<std::uint32_t>(stream_id),
                static_cast<std::uint32_t>(stream_id >> 32)};
}

void Philox::fill_block() {
    std::array<std::uint32_t, 4> ctr = counter_;
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        philox_round(ctr, key);
    }
    block_ = ctr;
    block_pos_ = 0;
    if (++counter_[0] == 0) ++counter_[1];
}

std::uint32_t Philox::next_u32() {
    if (block_pos_ >= 4) fill_block();
    return block_[block_pos_++];
}

std::uint64_t Philox::next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Philox::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Philox::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double Philox::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // u1 in (0, 1] keeps the log finite.
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * M_PI * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

double Philox::normal(double mean, double sd) {
    return mean + sd * normal();
}

}  // namespace pexp
