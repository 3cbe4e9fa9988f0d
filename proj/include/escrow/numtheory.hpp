#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include <gmpxx.h>

#include "escrow/errors.hpp"
#include "escrow/natural.hpp"
#include "escrow/random.hpp"

namespace escrow {

/// Size of n in bits: max{1, ceil(log2(n+1))}. Note bitsize(0) = 1.
inline std::size_t bitsize(const Natural& n) {
    if (n == 0)
        return 1;
    return mpz_sizeinbase(n.get_mpz_t(), 2);
}

inline Natural mod(const Natural& a, const Natural& m) {
    Natural r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline Natural mulmod(const Natural& a, const Natural& b, const Natural& m) {
    return mod(a * b, m);
}

inline Natural powmod(const Natural& base, const Natural& exp, const Natural& m) {
    Natural r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline Natural gcd(const Natural& a, const Natural& b) {
    Natural g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

/// x with a*x == 1 (mod m), 0 < x < m. Throws not_invertible if gcd(a,m) != 1.
inline Natural mod_inverse(const Natural& a, const Natural& m) {
    if (m < 2)
        throw domain_error("mod_inverse: modulus must be >= 2");
    Natural inv;
    if (mpz_invert(inv.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
        throw not_invertible("mod_inverse: gcd(a, m) != 1");
    return inv;
}

/// Floor of the integer square root (n >= 0).
inline Natural floor_sqrt(const Natural& n) {
    if (n < 0)
        throw domain_error("floor_sqrt: negative argument");
    Natural r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

/// r with r*r == n exactly, or nullopt when n is not a perfect square.
inline std::optional<Natural> integer_sqrt_exact(const Natural& n) {
    if (n < 0)
        return std::nullopt;
    Natural root, rem;
    mpz_sqrtrem(root.get_mpz_t(), rem.get_mpz_t(), n.get_mpz_t());
    if (rem != 0)
        return std::nullopt;
    return root;
}

/// Euler's criterion: true iff some x in [1, p) has x^2 == a (mod p).
/// p must be an odd prime; a must already be reduced and nonzero.
inline bool is_quadratic_residue(const Natural& a, const Natural& p) {
    if (a <= 0 || a >= p)
        throw domain_error("is_quadratic_residue: need 1 <= a < p");
    return powmod(a, (p - 1) / 2, p) == 1;
}

/// Both square roots of a modulo an odd prime p, ordered r1 < r2 with
/// r1 + r2 == p (Tonelli-Shanks). a == 0 yields (0, 0). nullopt when a is
/// a quadratic non-residue.
inline std::optional<std::pair<Natural, Natural>> sqrt_mod(const Natural& a,
                                                           const Natural& p) {
    if (a < 0 || a >= p)
        throw domain_error("sqrt_mod: need 0 <= a < p");
    if (a == 0)
        return std::make_pair(Natural(0), Natural(0));
    if (!is_quadratic_residue(a, p))
        return std::nullopt;

    Natural root;
    if (mod(p, 4) == 3) {
        root = powmod(a, (p + 1) / 4, p);
    } else {
        // p - 1 = q * 2^s with q odd
        Natural q = p - 1;
        std::size_t s = 0;
        while (mpz_even_p(q.get_mpz_t())) {
            q /= 2;
            ++s;
        }
        Natural z = 2;
        while (powmod(z, (p - 1) / 2, p) != p - 1)
            ++z;

        Natural c = powmod(z, q, p);
        Natural t = powmod(a, q, p);
        root = powmod(a, (q + 1) / 2, p);
        std::size_t m = s;
        while (t != 1) {
            Natural tt = t;
            std::size_t i = 0;
            while (tt != 1) {
                tt = mulmod(tt, tt, p);
                ++i;
            }
            Natural b = c;
            for (std::size_t j = 0; j + i + 1 < m; ++j)
                b = mulmod(b, b, p);
            root = mulmod(root, b, p);
            c = mulmod(b, b, p);
            t = mulmod(t, c, p);
            m = i;
        }
    }

    Natural other = p - root;
    if (root > other)
        std::swap(root, other);
    return std::make_pair(root, other);
}

namespace detail {

inline constexpr unsigned kSmallPrimes[] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,
    47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
    191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251};

inline bool miller_rabin_round(const Natural& n, const Natural& n_minus_1,
                               const Natural& odd_part, std::size_t two_exp,
                               const Natural& base) {
    Natural x = powmod(base, odd_part, n);
    if (x == 1 || x == n_minus_1)
        return true;
    for (std::size_t i = 1; i < two_exp; ++i) {
        x = mulmod(x, x, n);
        if (x == n_minus_1)
            return true;
    }
    return false;
}

// Folds the limbs of n into a 64-bit seed so the pseudo-random Miller-Rabin
// bases are a pure function of n.
inline std::uint64_t fold_limbs(const Natural& n) {
    std::uint64_t acc = 0x6b79736b636f6c62ULL;
    const mpz_srcptr raw = n.get_mpz_t();
    const int limbs = std::abs(raw->_mp_size);
    for (int i = 0; i < limbs; ++i) {
        acc ^= static_cast<std::uint64_t>(raw->_mp_d[i]);
        splitmix64(acc);
    }
    return acc;
}

} // namespace detail

/// Miller-Rabin probable-prime test. Deterministic (12 fixed witnesses) for
/// n < 2^64; for larger n uses base 2 plus `rounds - 1` pseudo-random bases
/// derived from n itself, with error probability <= 4^-rounds.
inline bool is_probable_prime(const Natural& n, unsigned rounds = 40) {
    if (n < 2)
        return false;
    for (unsigned sp : detail::kSmallPrimes) {
        if (n == sp)
            return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), sp))
            return false;
    }

    const Natural n_minus_1 = n - 1;
    Natural odd_part = n_minus_1;
    std::size_t two_exp = 0;
    while (mpz_even_p(odd_part.get_mpz_t())) {
        odd_part /= 2;
        ++two_exp;
    }

    if (mpz_sizeinbase(n.get_mpz_t(), 2) <= 64) {
        // Deterministic below 2^64 (in fact below ~3.18e23 for this set).
        for (unsigned base : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
            if (!detail::miller_rabin_round(n, n_minus_1, odd_part, two_exp,
                                            Natural(base)))
                return false;
        }
        return true;
    }

    if (!detail::miller_rabin_round(n, n_minus_1, odd_part, two_exp, Natural(2)))
        return false;
    std::uint64_t seed = detail::fold_limbs(n);
    for (unsigned i = 1; i < rounds; ++i) {
        const Natural base = 3 + Natural(detail::splitmix64(seed) >> 1);
        if (!detail::miller_rabin_round(n, n_minus_1, odd_part, two_exp, base))
            return false;
    }
    return true;
}

/// Random probable prime with bitsize exactly `bits` (top bit forced).
/// Throws exhausted_error after 64*bits candidate draws.
inline Natural random_prime(std::size_t bits, RandomSource& rng) {
    if (bits < 8)
        throw domain_error("random_prime: need bits >= 8");
    const std::uint64_t budget = 64 * static_cast<std::uint64_t>(bits);
    for (std::uint64_t attempt = 0; attempt < budget; ++attempt) {
        Natural cand = rng.bits(bits);
        mpz_setbit(cand.get_mpz_t(), bits - 1);
        mpz_setbit(cand.get_mpz_t(), 0);
        if (is_probable_prime(cand))
            return cand;
    }
    throw exhausted_error("random_prime: attempt budget exhausted");
}

} // namespace escrow
