#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace wikiref {

// Deterministic random numbers with identical output on every platform.
// std::mt19937 distributions are implementation defined, so everything
// that has to reproduce bit-for-bit (bootstrap draws, shuffles, synthetic
// data) goes through this generator instead.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Per-stage seed derived from the single master seed. One master seed
// reproduces every table; stages stay decoupled from each other.
inline std::uint64_t stage_seed(std::uint64_t master, std::string_view stage) {
    std::uint64_t state = master ^ fnv1a64(stage);
    return splitmix64(state);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // Warm up so that small seeds do not yield near-zero first draws.
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform index in [0, n). Modulo bias is irrelevant at our sizes and
    // keeps the draw sequence trivially reproducible.
    std::size_t next_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = next_unit();
        } while (u1 <= 0.0);
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Fisher-Yates; deterministic for a given seed and length.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = next_index(i);
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace wikiref
