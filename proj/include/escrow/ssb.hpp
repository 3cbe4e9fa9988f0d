#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "escrow/errors.hpp"
#include "escrow/natural.hpp"
#include "escrow/numtheory.hpp"
#include "escrow/random.hpp"

namespace escrow {

struct SsbParams {
    std::size_t alpha = 0;    // target factor bitsize
    std::size_t c = 0;        // escrow-key size deficit: bitsize(T) = alpha - c
    std::uint64_t k_max = 0;  // K, upper bound for the hidden coefficient

    bool operator==(const SsbParams&) const = default;
};

/// The designer's secret: a prime T of bitsize alpha - c plus the declared
/// parameters.
struct EscrowKey {
    Natural t;
    SsbParams params;
};

/// A vulnerable semi-prime with its secret witness: n = p*q and
/// p == k*q (mod T) for some 1 < k <= k_max.
struct SsbInstance {
    Natural n, p, q;
    std::uint64_t k = 0;
};

struct LowCandidate {
    std::uint64_t k = 0;
    Natural gamma_sq;  // candidate q^2 mod T
};

struct HighSolution {
    Natural pi, nu;  // p = pi*T + (p mod T), q = nu*T + (q mod T)
};

struct SsbGenOptions {
    bool randomize_k_order = false;       // default: scan k = 2..K in order
    std::uint64_t draw_budget = 10000;    // (q, r) prime pairs before Exhausted
};

namespace detail {

inline std::vector<std::uint64_t> k_scan_order(std::uint64_t k_max,
                                               bool randomize,
                                               RandomSource& rng) {
    std::vector<std::uint64_t> order;
    order.reserve(k_max - 1);
    for (std::uint64_t k = 2; k <= k_max; ++k)
        order.push_back(k);
    if (randomize) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(
                mpz_get_ui(rng.below(Natural(static_cast<unsigned long>(i))).get_mpz_t()));
            std::swap(order[i - 1], order[j]);
        }
    }
    return order;
}

} // namespace detail

/// Generates a vulnerable semi-prime under `key`: draws random primes q, r of
/// size alpha and scans k until p = r + ((k*q - r) mod T) is prime.
inline SsbInstance ssb_generate(const EscrowKey& key, RandomSource& rng,
                                const SsbGenOptions& opts = {}) {
    const auto& [alpha, c, k_max] = key.params;
    if (alpha < 16)
        throw domain_error("ssb_generate: alpha must be >= 16");
    if (k_max < 2)
        throw domain_error("ssb_generate: k_max must be >= 2");
    if (key.t < 3 || mpz_even_p(key.t.get_mpz_t()))
        throw domain_error("ssb_generate: T must be an odd prime");

    for (std::uint64_t draw = 0; draw < opts.draw_budget; ++draw) {
        const Natural q = random_prime(alpha, rng);
        const Natural r = random_prime(alpha, rng);
        const auto order =
            detail::k_scan_order(k_max, opts.randomize_k_order, rng);
        for (std::uint64_t k : order) {
            const Natural p = r + mod(Natural(static_cast<unsigned long>(k)) * q - r, key.t);
            if (p != q && is_probable_prime(p))
                return SsbInstance{p * q, p, q, k};
        }
    }
    throw exhausted_error("ssb_generate: draw budget exhausted");
}

/// True iff n = p*q, both factors are probable primes, and some
/// k in (1, k_max] satisfies p == k*q (mod T) (found by direct scan).
inline bool check_ssb(const SsbInstance& inst, const EscrowKey& key) {
    if (key.t < 3 || inst.p < 2 || inst.q < 2)
        return false;
    if (inst.n != inst.p * inst.q)
        return false;
    if (!is_probable_prime(inst.p) || !is_probable_prime(inst.q))
        return false;
    const Natural p_mod = mod(inst.p, key.t);
    const Natural q_mod = mod(inst.q, key.t);
    Natural acc = mod(2 * q_mod, key.t);  // (k*q) mod T, starting at k = 2
    for (std::uint64_t k = 2; k <= key.params.k_max; ++k) {
        if (acc == p_mod)
            return true;
        acc += q_mod;
        if (acc >= key.t)
            acc -= key.t;
    }
    return false;
}

/// Phase 1: every k in [2, k_max] whose N*k^-1 mod T is a quadratic residue,
/// paired with that residue (the candidate q^2 mod T), ordered by k.
/// Throws trivial_factor_error when gcd(N, T) > 1.
inline std::vector<LowCandidate> ssb_recover_low(const Natural& n,
                                                 const Natural& t,
                                                 std::uint64_t k_max) {
    const Natural g = gcd(n, t);
    if (g > 1)
        throw trivial_factor_error("ssb_recover_low: gcd(N, T) > 1", g);
    const Natural n_mod = mod(n, t);
    std::vector<LowCandidate> out;
    for (std::uint64_t k = 2; k <= k_max; ++k) {
        const Natural k_mod = mod(Natural(static_cast<unsigned long>(k)), t);
        if (k_mod == 0)
            continue;  // k has no inverse in GF(T); only possible in toy setups
        const Natural gamma_sq = mulmod(n_mod, mod_inverse(k_mod, t), t);
        if (is_quadratic_residue(gamma_sq, t))
            out.push_back(LowCandidate{k, gamma_sq});
    }
    return out;
}

/// Phase 2 core. Sweeps the coefficient sum C = pi + nu over
/// [floor(sqrt(2*(floor(N/T^2)-1))), ceil(N/T^2)] and, for each C with a
/// perfect-square discriminant of T*x^2 + (b-a-C*T)*x + (delta-b*C), visits
/// every non-negative integer solution (pi, nu) = (x, C-x) in canonical order
/// (C ascending, pi ascending). The visitor returns true to stop the sweep;
/// the function returns true iff it was stopped.
template <typename Visitor>
inline bool ssb_sweep_high(const Natural& n, const Natural& t,
                           const Natural& p_mod_t, const Natural& q_mod_t,
                           Visitor&& visit) {
    if (p_mod_t < 0 || p_mod_t >= t || q_mod_t < 0 || q_mod_t >= t)
        throw domain_error("ssb_recover_high: residues must lie in [0, T)");
    const Natural& b = p_mod_t;
    const Natural& a = q_mod_t;

    // delta = (N - (p mod T)(q mod T)) / T must be an exact non-negative
    // integer, otherwise this (k, gamma) branch is inconsistent.
    const Natural num = n - a * b;
    if (num < 0)
        return false;
    Natural delta, rem;
    mpz_fdiv_qr(delta.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(),
                t.get_mpz_t());
    if (rem != 0)
        return false;

    const Natural t2 = t * t;
    const Natural m = n / t2;
    Natural c_hi;
    mpz_cdiv_q(c_hi.get_mpz_t(), n.get_mpz_t(), t2.get_mpz_t());
    Natural c_lo = 0;
    if (m >= 1)
        c_lo = floor_sqrt(2 * (m - 1));

    const Natural two_t = 2 * t;
    const Natural four_t = 4 * t;
    Natural lin = b - a - c_lo * t;  // b - a - C*T
    Natural rhs = delta - b * c_lo;  // delta - b*C
    for (Natural cc = c_lo; cc <= c_hi; ++cc, lin -= t, rhs -= b) {
        const Natural disc = lin * lin - four_t * rhs;
        if (disc < 0)
            continue;
        if (!mpz_perfect_square_p(disc.get_mpz_t()))
            continue;
        const Natural root = floor_sqrt(disc);
        for (int sign : {-1, +1}) {
            if (sign > 0 && root == 0)
                break;  // double root, already visited
            Natural num_x = -lin;
            if (sign < 0)
                num_x -= root;
            else
                num_x += root;
            if (num_x < 0)
                continue;
            Natural x, xr;
            mpz_fdiv_qr(x.get_mpz_t(), xr.get_mpz_t(), num_x.get_mpz_t(),
                        two_t.get_mpz_t());
            if (xr != 0)
                continue;
            const Natural nu = cc - x;
            if (nu < 0)
                continue;
            if (visit(x, nu))
                return true;
        }
    }
    return false;
}

/// Phase 2: all (pi, nu) candidates for the given residue pair. An empty list
/// means the branch is inconsistent and the caller discards it.
inline std::vector<HighSolution> ssb_recover_high(const Natural& n,
                                                  const Natural& t,
                                                  const Natural& p_mod_t,
                                                  const Natural& q_mod_t) {
    std::vector<HighSolution> out;
    ssb_sweep_high(n, t, p_mod_t, q_mod_t,
                   [&](const Natural& pi, const Natural& nu) {
                       out.push_back(HighSolution{pi, nu});
                       return false;
                   });
    return out;
}

struct SsbBranch {
    std::uint64_t k = 0;
    int root = 0;  // 1 = smaller square root, 2 = larger (T minus the first)
    Natural gamma, p_mod_t, q_mod_t;
    std::vector<HighSolution> solutions;
};

struct SsbRecoveryTrace {
    std::vector<LowCandidate> low;
    std::vector<SsbBranch> branches;  // branches examined, in scan order
    bool recovered = false;
    std::uint64_t k = 0;
    int root = 0;
    HighSolution winner;
};

/// Full recovery pipeline: for each low candidate (k ascending), each square
/// root gamma of gamma^2 (smaller root first), derive q mod T = gamma and
/// p mod T = k*gamma mod T, sweep the high phase (C ascending) and return the
/// first (p, q) with p*q = N. The scan order makes the result deterministic.
inline std::optional<std::pair<Natural, Natural>>
ssb_recover(const Natural& n, const Natural& t, std::uint64_t k_max,
            SsbRecoveryTrace* trace = nullptr) {
    const auto low = ssb_recover_low(n, t, k_max);
    if (trace)
        trace->low = low;
    for (const auto& cand : low) {
        const auto roots = sqrt_mod(cand.gamma_sq, t);
        if (!roots)
            continue;  // cannot happen: the low phase only keeps residues
        const Natural gammas[2] = {roots->first, roots->second};
        for (int ri = 0; ri < 2; ++ri) {
            const Natural& gamma = gammas[ri];
            const Natural p_mod =
                mulmod(Natural(static_cast<unsigned long>(cand.k)), gamma, t);
            SsbBranch* branch = nullptr;
            if (trace) {
                trace->branches.push_back(
                    SsbBranch{cand.k, ri + 1, gamma, p_mod, gamma, {}});
                branch = &trace->branches.back();
            }
            std::optional<std::pair<Natural, Natural>> found;
            ssb_sweep_high(
                n, t, p_mod, gamma, [&](const Natural& pi, const Natural& nu) {
                    if (branch)
                        branch->solutions.push_back(HighSolution{pi, nu});
                    Natural p = pi * t + p_mod;
                    Natural q = nu * t + gamma;
                    if (p > 1 && q > 1 && p * q == n) {
                        if (trace) {
                            trace->recovered = true;
                            trace->k = cand.k;
                            trace->root = ri + 1;
                            trace->winner = HighSolution{pi, nu};
                        }
                        found = std::make_pair(std::move(p), std::move(q));
                        return true;
                    }
                    return false;
                });
            if (found)
                return found;
        }
    }
    return std::nullopt;
}

} // namespace escrow
