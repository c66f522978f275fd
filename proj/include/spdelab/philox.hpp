#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11) and a
// Gaussian stream keyed by (master seed, stream tag, path index). Every
// path draws from its own counter range, so Monte Carlo results do not
// depend on which worker simulated which path.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "spdelab/errors.hpp"

namespace spdelab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr void philox_round(PhiloxCounter& c, const PhiloxKey& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

constexpr PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += detail::kPhiloxW0;
            key[1] += detail::kPhiloxW1;
        }
        detail::philox_round(counter, key);
    }
    return counter;
}

// Independent purposes draw from disjoint counter ranges.
enum class StreamTag : std::uint32_t {
    noise = 0,
    independent_noise = 1,
    probes = 2,
    sampling = 3,
    initial_state = 4,
};

class NormalStream {
public:
    NormalStream(std::uint64_t master_seed, StreamTag tag, std::uint64_t index)
        : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
          tag_(static_cast<std::uint32_t>(tag)),
          index_(index) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const auto [z0, z1] = next_pair();
        spare_ = z1;
        have_spare_ = true;
        return z0;
    }

    void fill(std::span<double> out, double scale = 1.0) {
        for (double& v : out) v = scale * next();
    }

    // Uniform on the open interval (0, 1).
    double uniform() {
        if (uniform_left_ == 0) {
            refill_uniform();
        }
        return uniform_buf_[2 - uniform_left_--];
    }

private:
    static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    PhiloxCounter next_block() {
        if (block_ == UINT32_MAX) {
            throw Error("NormalStream: counter range exhausted");
        }
        const PhiloxCounter ctr{block_++, tag_, static_cast<std::uint32_t>(index_),
                                static_cast<std::uint32_t>(index_ >> 32)};
        return philox4x32_10(ctr, key_);
    }

    std::array<double, 2> next_pair() {
        const PhiloxCounter r = next_block();
        const double u1 = to_open_unit(r[0], r[1]);
        const double u2 = to_open_unit(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    void refill_uniform() {
        const PhiloxCounter r = next_block();
        uniform_buf_ = {to_open_unit(r[0], r[1]), to_open_unit(r[2], r[3])};
        uniform_left_ = 2;
    }

    PhiloxKey key_;
    std::uint32_t tag_;
    std::uint64_t index_;
    std::uint32_t block_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
    std::array<double, 2> uniform_buf_{};
    int uniform_left_ = 0;
};

}  // namespace spdelab
