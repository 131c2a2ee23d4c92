#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace sclt {

// Philox4x32-10 counter-based generator. A stream is identified by a key
// (seed, trial, step); the block counter runs inside the stream, so streams
// never overlap and any (seed, trial, step) can be regenerated independently.
class Philox {
public:
    using result_type = std::uint32_t;

    Philox(std::uint64_t seed, std::uint64_t trial, std::uint64_t step);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform in (0, 1), never exactly 0 or 1.
    double uniform();
    double normal();

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> ctr_{};
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Fixed stream-step tags so distinct uses of one (seed, trial) never collide.
namespace stream_tag {
inline constexpr std::uint64_t sample = 0;
inline constexpr std::uint64_t ou = 0x4f55000000000000ULL;
inline constexpr std::uint64_t perturb = 0x5045000000000000ULL;
inline constexpr std::uint64_t dbm = 0x4442000000000000ULL;
inline constexpr std::uint64_t ginibre = 0x4749000000000000ULL;
inline constexpr std::uint64_t harness = 0x4841000000000000ULL;
}  // namespace stream_tag

}  // namespace sclt
