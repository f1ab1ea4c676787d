#pragma once

#include <cstdint>
#include <random>

#include "switchlab/rational.hpp"

namespace switchlab {

// All sampling runs through mt19937_64, whose output sequence is pinned by the
// standard, so a seed fully determines every sample on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform draw from [0, bound), bound >= 1. Rejection sampling keeps it exact.
    std::uint64_t uniform(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::uniform: zero bound");
        if (bound == 1) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    // Exact Bernoulli(p) for rational p in [0, 1].
    bool bernoulli(const Rational& p) {
        if (p.is_zero()) return false;
        if (p.num() == p.den()) return true;
        if (p.den().fits_longlong()) {
            std::uint64_t den = static_cast<std::uint64_t>(p.den().to_longlong());
            std::uint64_t num = static_cast<std::uint64_t>(p.num().to_longlong());
            return uniform(den) < num;
        }
        return uniform_big(p.den()) < p.num();
    }

private:
    std::mt19937_64 gen_;

    BigInt uniform_big(const BigInt& bound) {
        std::size_t bits = bound.bit_length();
        for (;;) {
            BigInt x(0);
            for (std::size_t got = 0; got < bits; got += 32) {
                std::uint32_t chunk = static_cast<std::uint32_t>(gen_());
                std::size_t take = std::min<std::size_t>(32, bits - got);
                if (take < 32) chunk &= (1u << take) - 1u;
                x = x * BigInt(1LL << take) + BigInt(static_cast<long long>(chunk));
            }
            if (x < bound) return x;
        }
    }
};

// Derives an independent per-trial seed from a base seed and a trial index
// (splitmix64 finalizer). Trials can then run in any order or in parallel
// without changing results.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace switchlab
