#include "sclt/rng.hpp"

#include <cmath>

#include "sclt/common.hpp"

namespace sclt {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::numerical_failure: return "numerical_failure";
        case ErrorCode::branch_selection: return "branch_selection";
        case ErrorCode::singular_operator: return "singular_operator";
        case ErrorCode::quadrature_failure: return "quadrature_failure";
        case ErrorCode::unsupported_regime: return "unsupported_regime";
        case ErrorCode::degenerate_sample: return "degenerate_sample";
        case ErrorCode::retry_exhausted: return "retry_exhausted";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::schema_mismatch: return "schema_mismatch";
        case ErrorCode::config_error: return "config_error";
    }
    return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t trial, std::uint64_t step) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    ctr_ = {0u, 0u, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
}

void Philox::refill() {
    std::array<std::uint32_t, 4> c = ctr_;
    std::array<std::uint32_t, 2> k = key_;
    for (int r = 0; r < 10; ++r) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    buf_ = c;
    pos_ = 0;
    if (++ctr_[0] == 0) ++ctr_[1];
}

Philox::result_type Philox::operator()() {
    if (pos_ >= 4) refill();
    return buf_[pos_++];
}

double Philox::uniform() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Philox::normal() {
    // Box-Muller; implemented here rather than via std::normal_distribution so
    // the stream of variates is identical across standard libraries.
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

}  // namespace sclt
