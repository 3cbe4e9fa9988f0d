#pragma once

#include <cstdint>
#include <random>

#include <gmpxx.h>

#include "escrow/errors.hpp"
#include "escrow/natural.hpp"

namespace escrow {

/// Deterministic stream of uniform bits (GMP Mersenne twister). A fixed seed
/// reproduces the exact same draws, which is what the --seed flag and the
/// seeded test suites rely on. Not copyable; pass by reference.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) {
        gmp_randinit_mt(state_);
        gmp_randseed_ui(state_, static_cast<unsigned long>(seed));
    }

    static RandomSource from_entropy() {
        std::random_device dev;
        const std::uint64_t seed =
            (static_cast<std::uint64_t>(dev()) << 32) ^ dev();
        return RandomSource(seed);
    }

    ~RandomSource() { gmp_randclear(state_); }

    RandomSource(const RandomSource&) = delete;
    RandomSource& operator=(const RandomSource&) = delete;

    /// Uniform in [0, 2^nbits).
    Natural bits(std::size_t nbits) {
        Natural out;
        mpz_urandomb(out.get_mpz_t(), state_, nbits);
        return out;
    }

    /// Uniform in [0, bound); bound must be positive.
    Natural below(const Natural& bound) {
        if (bound <= 0)
            throw domain_error("RandomSource::below: bound must be positive");
        Natural out;
        mpz_urandomm(out.get_mpz_t(), state_, bound.get_mpz_t());
        return out;
    }

    std::uint64_t u64() {
        return static_cast<std::uint64_t>(mpz_get_ui(bits(64).get_mpz_t()));
    }

private:
    gmp_randstate_t state_;
};

} // namespace escrow
