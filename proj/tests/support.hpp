#pragma once

// Test-side oracles, kept independent of the library code paths they check.

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "escrow/natural.hpp"

namespace testsupport {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp,
                                std::uint64_t m) {
    std::uint64_t out = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1)
            out = mulmod_u64(out, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return out;
}

/// Deterministic Miller-Rabin for 64-bit inputs (12 fixed witnesses).
inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2)
        return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                            23ull, 29ull, 31ull, 37ull}) {
        if (n == p)
            return true;
        if (n % p == 0)
            return false;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                            23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1)
            continue;
        bool witness = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness)
            return false;
    }
    return true;
}

/// Complete trial-division factorization of a 64-bit value.
inline std::map<std::uint64_t, unsigned> factor_u64(std::uint64_t n) {
    std::map<std::uint64_t, unsigned> out;
    for (std::uint64_t d = 2; d * d <= n; d += (d == 2) ? 1 : 2) {
        while (n % d == 0) {
            n /= d;
            ++out[d];
        }
    }
    if (n > 1)
        ++out[n];
    return out;
}

/// The set of nonzero quadratic residues modulo p, by exhaustive squaring.
inline std::set<std::uint64_t> residues_by_squaring(std::uint64_t p) {
    std::set<std::uint64_t> out;
    for (std::uint64_t x = 1; x < p; ++x)
        out.insert(mulmod_u64(x, x, p));
    return out;
}

struct EgcdResult {
    long long g, x, y;  // g = gcd(a, b) = a*x + b*y
};

inline EgcdResult egcd(long long a, long long b) {
    if (b == 0)
        return {a, 1, 0};
    const EgcdResult sub = egcd(b, a % b);
    return {sub.g, sub.y, sub.x - (a / b) * sub.y};
}

inline std::vector<std::uint64_t> primes_below(std::uint64_t bound) {
    std::vector<bool> sieve(bound, true);
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 2; i < bound; ++i) {
        if (!sieve[i])
            continue;
        out.push_back(i);
        for (std::uint64_t j = i * i; j < bound; j += i)
            sieve[j] = false;
    }
    return out;
}

} // namespace testsupport
