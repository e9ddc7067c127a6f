#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace splicebs {

namespace detail {

/// SplitMix64 finalizer, used only to derive engine seeds from stream keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

/**
 * A seeded, independently owned random stream.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Every transformation (uniform, index, normal, exponential) is
 * written out here rather than delegated to <random> distributions, whose
 * algorithms are implementation-defined. Streams with the same (seed, id)
 * therefore reproduce the same draws on any conforming toolchain.
 */
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t id = 0)
        : seed_(seed), id_(id), engine_(detail::mix64(seed ^ detail::mix64(id + 0x5851F42D4C957F2Dull))) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t id() const noexcept { return id_; }

    /// Stream keyed on (this stream's key, child). Does not advance this stream.
    RandomStream child(std::uint64_t child_id) const {
        return RandomStream(detail::mix64(seed_ ^ detail::mix64(id_)), child_id);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
    std::uint64_t index(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(engine_()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal by the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Exp(1) by inversion.
    double exponential() { return -std::log(uniform_pos()); }

private:
    std::uint64_t seed_;
    std::uint64_t id_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace splicebs
