#pragma once

#include <array>
#include <cstdint>

namespace pexp {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// A stream is addressed by (seed, stream_id): the seed keys the generator and
// the stream id occupies the upper half of the 128-bit counter, so distinct
// streams with the same seed never overlap. This gives bit-identical draws
// regardless of how work is split across threads: worker r always consumes
// Philox(seed, stream::replication(r)).
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream_id);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double next_double();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; the paired deviate is cached.
    double normal();
    double normal(double mean, double sd);

private:
    void fill_block();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    int block_pos_ = 4;  // forces a fill on first use
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

// Stream-id namespaces. Tags keep draws for different purposes disjoint even
// when their indices collide.
namespace stream {

constexpr std::uint64_t tagged(std::uint64_t tag, std::uint64_t index) {
    return (tag << 56) | (index & 0x00FF'FFFF'FFFF'FFFFULL);
}
constexpr std::uint64_t population(std::uint64_t part) { return tagged(1, part); }
constexpr std::uint64_t replication(std::uint64_t r) { return tagged(2, r); }
constexpr std::uint64_t region(std::uint64_t i) { return tagged(3, i); }
constexpr std::uint64_t scratch(std::uint64_t k) { return tagged(4, k); }

}  // namespace stream

}  // namespace pexp
