#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace relval {

// splitmix64 step, used both for seeding and for hashing.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** -- the library-wide PRNG. Fixed algorithm so results are
// reproducible across platforms and standard-library versions.
class Rng {
public:
    using result_type = uint64_t;

    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return ~0ULL; }

    uint64_t operator()() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform integer in [0, n), unbiased via rejection
    uint64_t below(uint64_t n) {
        const uint64_t limit = max() - max() % n;
        uint64_t v;
        do { v = (*this)(); } while (v >= limit);
        return v % n;
    }

    // uniform double in [0, 1)
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller (polar form avoided to keep the
    // consumption of the stream fixed at two draws per value)
    double normal();

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

inline double Rng::normal() {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Stable 64-bit hash used to derive independent substreams from a master
// seed and a list of identifying tokens (dataset name, technique, classifier,
// run index, ...). FNV-1a over the tokens, finalized with splitmix64.
class StreamKey {
public:
    explicit StreamKey(uint64_t master_seed) : h_(0xcbf29ce484222325ULL) {
        mix(master_seed);
    }

    StreamKey& mix(uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h_ ^= (v >> (8 * i)) & 0xffULL;
            h_ *= 0x100000001b3ULL;
        }
        return *this;
    }

    StreamKey& mix(std::string_view s) {
        for (unsigned char c : s) {
            h_ ^= c;
            h_ *= 0x100000001b3ULL;
        }
        // separator so ("ab","c") != ("a","bc")
        h_ ^= 0x1f;
        h_ *= 0x100000001b3ULL;
        return *this;
    }

    uint64_t seed() const {
        uint64_t s = h_;
        return splitmix64(s);
    }

    Rng rng() const { return Rng(seed()); }

private:
    uint64_t h_;
};

// Seeded Fisher-Yates shuffle of indices 0..n-1.
inline std::vector<int> shuffled_indices(int n, Rng& rng) {
    std::vector<int> idx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng.below(static_cast<uint64_t>(i) + 1));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    return idx;
}

} // namespace relval
