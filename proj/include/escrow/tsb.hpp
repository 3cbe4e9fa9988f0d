#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "escrow/errors.hpp"
#include "escrow/natural.hpp"
#include "escrow/numtheory.hpp"
#include "escrow/random.hpp"
#include "escrow/ssb.hpp"

namespace escrow {

struct TsbParams {
    std::size_t alpha = 0;
    std::size_t c = 0;
    std::uint64_t k_max = 0;  // K
    Natural b_threshold;      // B, detection threshold; bitsize ~= alpha - 2c
};

/// Default detection threshold: B = 2^(alpha - 2c).
inline Natural default_b_threshold(std::size_t alpha, std::size_t c) {
    if (alpha <= 2 * c)
        throw domain_error("b_threshold: need alpha > 2c");
    Natural b = 1;
    b <<= (alpha - 2 * c);
    return b;
}

/// A vulnerable pair of semi-primes with its secret witnesses. The backdoor
/// conditions, all modulo the designer prime T:
///   H1: q2 == h^2 * q1       H2: p1 == h*k1 * q2      H3: p2 == k2 * q1
///   H4: h, k1, k2 pairwise coprime                    H5: h*k1 != k2 (mod T)
///   H6: (h*q1)^2 mod T > B
struct TsbInstance {
    Natural n1, n2;
    Natural p1, q1, p2, q2;
    std::uint64_t h = 0, k1 = 0, k2 = 0;
};

struct MediumCandidate {
    std::uint64_t kt1 = 0, kt2 = 0;  // the medium coefficients (k~1, k~2)
    Natural g;                       // gcd value, candidate (h^2*q1^2) mod T
};

/// Every medium pair whose gcd cleared the detection threshold, kept for
/// diagnostics whether or not it was accepted.
struct MediumExamined {
    enum class Outcome { accepted, above_t, non_residue };
    std::uint64_t kt1 = 0, kt2 = 0;
    Natural g;
    Outcome outcome = Outcome::accepted;
};

struct LowCandidateTsb {
    Natural h, k1;     // an ordered coprime split of the product h*k1
    Natural k2;
    Natural gamma_sq;  // candidate (h*q1)^2 mod T, passed through
};

struct TsbGenOptions {
    std::uint64_t draw_budget = 10000;   // (q1, p) prime pairs before Exhausted
    std::uint64_t correl_budget = 256;   // k draws inside get_correl_prime
    std::uint64_t coprime_retries = 64;  // correl-prime calls per H4 loop
};

struct TsbRecoverOptions {
    bool prune_splits_by_k = false;  // drop splits with h or k1 > K
};

/// Draws a random k in [2, k_max] and searches the progression
/// p = ((k*j*q) mod T) + m*T, m = 1, 2, ..., for the first probable prime of
/// bitsize ~= bitsize(T) + c; retries with a fresh k when m reaches 2^(2c).
inline std::pair<Natural, std::uint64_t>
get_correl_prime(const Natural& q, const Natural& j, const Natural& t,
                 std::uint64_t k_max, std::size_t c, RandomSource& rng,
                 std::uint64_t retry_budget = 256) {
    if (q <= 0 || j < 1)
        throw domain_error("get_correl_prime: need q > 0 and j >= 1");
    if (k_max < 2)
        throw domain_error("get_correl_prime: need k_max >= 2");
    if (c < 1 || c > 16)
        throw domain_error("get_correl_prime: need 1 <= c <= 16");

    const std::size_t target = bitsize(t) + c;
    const std::uint64_t m_end = 1ULL << (2 * c);
    for (std::uint64_t attempt = 0; attempt < retry_budget; ++attempt) {
        const std::uint64_t k =
            2 + mpz_get_ui(rng.below(Natural(static_cast<unsigned long>(k_max - 1))).get_mpz_t());
        const Natural t1 = mod(Natural(static_cast<unsigned long>(k)) * j * q, t);
        Natural p = t1;
        for (std::uint64_t m = 1; m < m_end; ++m) {
            p += t;
            const std::size_t bits = bitsize(p);
            if (bits + 1 < target)
                continue;
            if (bits > target + 1)
                break;
            if (is_probable_prime(p))
                return {p, k};
        }
    }
    throw exhausted_error("get_correl_prime: retry budget exhausted");
}

/// True iff every TsbInstance invariant holds under (T, params): the products,
/// coprimality of the pair, primality of all four factors, and H1-H6.
inline bool check_tsb(const TsbInstance& inst, const Natural& t,
                      const TsbParams& params) {
    if (t < 3)
        return false;
    if (inst.n1 != inst.p1 * inst.q1 || inst.n2 != inst.p2 * inst.q2)
        return false;
    if (gcd(inst.n1, inst.n2) != 1)
        return false;
    for (const Natural* f : {&inst.p1, &inst.q1, &inst.p2, &inst.q2})
        if (!is_probable_prime(*f))
            return false;
    const auto in_range = [&](std::uint64_t v) {
        return v > 1 && v <= params.k_max;
    };
    if (!in_range(inst.h) || !in_range(inst.k1) || !in_range(inst.k2))
        return false;
    const Natural h(static_cast<unsigned long>(inst.h));
    const Natural k1(static_cast<unsigned long>(inst.k1));
    const Natural k2(static_cast<unsigned long>(inst.k2));
    if (mod(inst.q2 - h * h * inst.q1, t) != 0)          // H1
        return false;
    if (mod(inst.p1 - h * k1 * inst.q2, t) != 0)         // H2
        return false;
    if (mod(inst.p2 - k2 * inst.q1, t) != 0)             // H3
        return false;
    if (gcd(h, k1) != 1 || gcd(h, k2) != 1 || gcd(k1, k2) != 1)  // H4
        return false;
    if (mod(h * k1 - k2, t) == 0)                        // H5
        return false;
    const Natural hq1 = mod(h * inst.q1, t);
    if (mulmod(hq1, hq1, t) <= params.b_threshold)       // H6
        return false;
    return true;
}

/// Generates a vulnerable pair under designer prime T, following the
/// three-stage search: (a) q1, q2 linked by H1; (b) p1 by H2 with
/// gcd(k1, h) = 1; (c) p2 by H3 with k2 coprime to both and H5 holding.
/// H6 is checked on (h, q1) before the expensive stages, and every condition
/// is re-verified before returning.
inline TsbInstance tsb_generate(const TsbParams& params, const Natural& t,
                                RandomSource& rng,
                                const TsbGenOptions& opts = {}) {
    const auto alpha = params.alpha;
    const auto c = params.c;
    const auto k_max = params.k_max;
    if (alpha < 16)
        throw domain_error("tsb_generate: alpha must be >= 16");
    // K = 2 forces h = k1 = 2, contradicting H4.
    if (k_max < 3)
        throw domain_error("tsb_generate: k_max must be >= 3");
    if (t < 3 || mpz_even_p(t.get_mpz_t()))
        throw domain_error("tsb_generate: T must be an odd prime");
    if (params.b_threshold >= t)
        throw domain_error("tsb_generate: b_threshold must be < T");

    for (std::uint64_t draw = 0; draw < opts.draw_budget; ++draw) {
        const Natural q1 = random_prime(alpha, rng);
        const Natural pr = random_prime(alpha, rng);

        std::uint64_t h = 0;
        Natural q2;
        for (std::uint64_t hc = 2; hc <= k_max; ++hc) {
            const Natural hn(static_cast<unsigned long>(hc));
            const Natural cand = pr + mod(hn * hn * q1 - pr, t);
            if (cand != q1 && is_probable_prime(cand)) {
                h = hc;
                q2 = cand;
                break;
            }
        }
        if (h == 0)
            continue;

        const Natural hq1 = mod(Natural(static_cast<unsigned long>(h)) * q1, t);
        if (mulmod(hq1, hq1, t) <= params.b_threshold)  // H6
            continue;

        Natural p1;
        std::uint64_t k1 = 0;
        bool ok = false;
        try {
            for (std::uint64_t i = 0; i < opts.coprime_retries; ++i) {
                auto [cand, kc] =
                    get_correl_prime(q2, Natural(static_cast<unsigned long>(h)),
                                     t, k_max, c, rng, opts.correl_budget);
                if (std::gcd(kc, h) == 1 && cand != q1 && cand != q2) {
                    p1 = std::move(cand);
                    k1 = kc;
                    ok = true;
                    break;
                }
            }
        } catch (const exhausted_error&) {
        }
        if (!ok)
            continue;

        Natural p2;
        std::uint64_t k2 = 0;
        ok = false;
        try {
            for (std::uint64_t i = 0; i < opts.coprime_retries; ++i) {
                auto [cand, kc] = get_correl_prime(q1, Natural(1), t, k_max, c,
                                                   rng, opts.correl_budget);
                if (std::gcd(kc, h) != 1 || std::gcd(kc, k1) != 1)
                    continue;
                const Natural hk1 = Natural(static_cast<unsigned long>(h)) *
                                    Natural(static_cast<unsigned long>(k1));
                if (mod(hk1 - Natural(static_cast<unsigned long>(kc)), t) == 0)
                    continue;  // H5
                if (cand == p1 || cand == q1 || cand == q2)
                    continue;
                p2 = std::move(cand);
                k2 = kc;
                ok = true;
                break;
            }
        } catch (const exhausted_error&) {
        }
        if (!ok)
            continue;

        TsbInstance inst{p1 * q1, p2 * q2, p1, q1, p2, q2, h, k1, k2};
        if (check_tsb(inst, t, params))
            return inst;
    }
    throw exhausted_error("tsb_generate: draw budget exhausted");
}

namespace detail {

/// Diagonal enumeration of the medium coefficients: s = kt1 + kt2 ascending,
/// kt1 ascending within a diagonal, clamped to the rectangle
/// kt1 < K^2, kt2 < K. Yields pairs whose gcd lands in (B, T) and is a
/// quadratic residue mod T; every pair with gcd > B is reported to
/// `examined` when given.
class MediumScan {
public:
    MediumScan(const Natural& n1, const Natural& n2, const Natural& t,
               const Natural& b, std::uint64_t k_max)
        : n1_mod_(mod(n1, t)), n2_mod_(mod(n2, t)), t_(t), b_(b),
          kt1_limit_(k_max * k_max), kt2_limit_(k_max),
          s_max_(k_max * k_max + k_max) {
        if (k_max > (1ULL << 31))
            throw domain_error("tsb recovery: k_max too large");
    }

    std::optional<MediumCandidate> next(std::vector<MediumExamined>* examined) {
        while (s_ <= s_max_) {
            const std::uint64_t kt1_hi = std::min(s_, kt1_limit_ - 1);
            while (kt1_ <= kt1_hi) {
                const std::uint64_t kt1 = kt1_++;
                const std::uint64_t kt2 = s_ - kt1;
                if (kt2 >= kt2_limit_)
                    continue;
                const Natural g =
                    gcd(n1_mod_ + Natural(static_cast<unsigned long>(kt1)) * t_,
                        n2_mod_ + Natural(static_cast<unsigned long>(kt2)) * t_);
                if (g <= b_)
                    continue;
                if (g >= t_) {
                    if (examined)
                        examined->push_back(MediumExamined{
                            kt1, kt2, g, MediumExamined::Outcome::above_t});
                    continue;
                }
                if (!is_quadratic_residue(g, t_)) {
                    if (examined)
                        examined->push_back(MediumExamined{
                            kt1, kt2, g, MediumExamined::Outcome::non_residue});
                    continue;
                }
                if (examined)
                    examined->push_back(MediumExamined{
                        kt1, kt2, g, MediumExamined::Outcome::accepted});
                return MediumCandidate{kt1, kt2, g};
            }
            ++s_;
            kt1_ = s_ > kt2_limit_ - 1 ? s_ - (kt2_limit_ - 1) : 0;
        }
        return std::nullopt;
    }

private:
    Natural n1_mod_, n2_mod_, t_, b_;
    std::uint64_t kt1_limit_, kt2_limit_, s_max_;
    std::uint64_t s_ = 0, kt1_ = 0;
};

inline void require_coprime_to_t(const Natural& n1, const Natural& n2,
                                 const Natural& t) {
    for (const Natural* n : {&n1, &n2}) {
        const Natural g = gcd(*n, t);
        if (g > 1)
            throw trivial_factor_error("tsb recovery: gcd(N, T) > 1", g);
    }
}

} // namespace detail

/// Phase 1: brute-force diagonal scan for the medium coefficients.
/// Returns accepted candidates ordered by (kt1 + kt2, kt1);
/// pairs that cleared B but failed the g < T or residue filters land in
/// `examined` when provided. Throws trivial_factor_error when T shares a
/// factor with either semi-prime.
inline std::vector<MediumCandidate>
tsb_recover_medium(const Natural& n1, const Natural& n2, const Natural& t,
                   const Natural& b, std::uint64_t k_max,
                   std::vector<MediumExamined>* examined = nullptr) {
    detail::require_coprime_to_t(n1, n2, t);
    detail::MediumScan scan(n1, n2, t, b, k_max);
    std::vector<MediumCandidate> out;
    while (auto cand = scan.next(examined))
        out.push_back(std::move(*cand));
    return out;
}

/// Complete factorization of n by trial division, as long as every prime
/// factor is <= limit; nullopt (TooLarge) otherwise.
inline std::optional<std::map<Natural, unsigned>>
factor_by_trial_division(const Natural& n, const Natural& limit) {
    if (n < 1)
        throw domain_error("factor_by_trial_division: need n >= 1");
    std::map<Natural, unsigned> out;
    Natural m = n;
    Natural d = 2;
    while (d <= limit && d * d <= m) {
        while (mpz_divisible_p(m.get_mpz_t(), d.get_mpz_t())) {
            m /= d;
            ++out[d];
        }
        d += (d == 2) ? 1 : 2;
    }
    if (m > 1) {
        if (d * d > m && m <= limit) {
            ++out[m];  // remaining cofactor is prime and small enough
        } else {
            return std::nullopt;
        }
    }
    return out;
}

namespace detail {

/// Ordered coprime splits (h, k1) of a factored product, h and k1 both > 1,
/// sorted by h ascending. Each prime power goes entirely to one side.
inline std::vector<std::pair<Natural, Natural>>
coprime_splits(const std::map<Natural, unsigned>& factors, const Natural& n) {
    std::vector<Natural> prime_powers;
    for (const auto& [p, e] : factors) {
        Natural pw = 1;
        for (unsigned i = 0; i < e; ++i)
            pw *= p;
        prime_powers.push_back(pw);
    }
    std::vector<std::pair<Natural, Natural>> out;
    if (prime_powers.size() < 2)
        return out;
    const std::uint32_t subsets = 1u << prime_powers.size();
    for (std::uint32_t mask = 1; mask + 1 < subsets; ++mask) {
        Natural h = 1;
        for (std::size_t i = 0; i < prime_powers.size(); ++i)
            if (mask & (1u << i))
                h *= prime_powers[i];
        out.emplace_back(h, n / h);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

struct TsbLowResult {
    bool exact = false;  // both divisions by gamma^2 were exact
    Natural k2, hk1;
    std::vector<LowCandidateTsb> splits;
};

/// Phase 2 with diagnostics: the two exact divisions recovering k2 and the
/// product h*k1, then the coprime-split enumeration.
inline TsbLowResult tsb_recover_low_detail(const Natural& n1, const Natural& n2,
                                           const Natural& t,
                                           const MediumCandidate& cand,
                                           std::uint64_t k_max,
                                           const TsbRecoverOptions& opts = {}) {
    TsbLowResult res;
    const Natural& g = cand.g;
    const Natural num2 =
        mod(n2, t) + Natural(static_cast<unsigned long>(cand.kt2)) * t;
    const Natural num1 =
        mod(n1, t) + Natural(static_cast<unsigned long>(cand.kt1)) * t;
    Natural k2, r2;
    mpz_fdiv_qr(k2.get_mpz_t(), r2.get_mpz_t(), num2.get_mpz_t(), g.get_mpz_t());
    if (r2 != 0)
        return res;
    Natural hk1, r1;
    mpz_fdiv_qr(hk1.get_mpz_t(), r1.get_mpz_t(), num1.get_mpz_t(), g.get_mpz_t());
    if (r1 != 0)
        return res;
    res.exact = true;
    res.k2 = k2;
    res.hk1 = hk1;
    if (hk1 < 1)
        return res;

    const Natural limit = 2 * Natural(static_cast<unsigned long>(k_max)) *
                          Natural(static_cast<unsigned long>(k_max));
    const auto factors = factor_by_trial_division(hk1, limit);
    if (!factors)
        return res;  // implausibly large factor; abandon this branch
    for (auto& [h, k1] : detail::coprime_splits(*factors, hk1)) {
        if (opts.prune_splits_by_k &&
            (h > Natural(static_cast<unsigned long>(k_max)) ||
             k1 > Natural(static_cast<unsigned long>(k_max))))
            continue;
        res.splits.push_back(LowCandidateTsb{h, k1, k2, g});
    }
    return res;
}

/// Phase 2 as specified: the ordered coprime splits for a medium candidate,
/// empty when either division is inexact or the product resists trial
/// division.
inline std::vector<LowCandidateTsb>
tsb_recover_low(const Natural& n1, const Natural& n2, const Natural& t,
                const MediumCandidate& cand, std::uint64_t k_max,
                const TsbRecoverOptions& opts = {}) {
    return tsb_recover_low_detail(n1, n2, t, cand, k_max, opts).splits;
}

struct TsbBranchResidues {
    Natural q1_mod, q2_mod, p1_mod, p2_mod;
};

/// Phase 3 residue derivation for one (h, k1, k2, gamma) branch:
/// q1 = gamma * h^-1, q2 = q1 * h^2, p1 = h*k1*q2, p2 = k2*q1 (all mod T).
/// nullopt when h is not invertible mod T.
inline std::optional<TsbBranchResidues>
tsb_branch_residues(const Natural& h, const Natural& k1, const Natural& k2,
                    const Natural& gamma, const Natural& t) {
    const Natural h_mod = mod(h, t);
    if (h_mod == 0 || gcd(h_mod, t) != 1)
        return std::nullopt;
    TsbBranchResidues res;
    res.q1_mod = mulmod(gamma, mod_inverse(h_mod, t), t);
    res.q2_mod = mulmod(res.q1_mod, mulmod(h_mod, h_mod, t), t);
    res.p1_mod = mulmod(mod(h * k1, t), res.q2_mod, t);
    res.p2_mod = mulmod(mod(k2, t), res.q1_mod, t);
    return res;
}

struct TsbFactors {
    Natural p1, q1, p2, q2;
};

struct TsbRecoveryTrace {
    std::vector<MediumExamined> medium_over_threshold;
    std::vector<MediumCandidate> medium_accepted;
    std::uint64_t splits_examined = 0;
    std::uint64_t branches_examined = 0;
    bool recovered = false;
    Natural h, k1, k2;
    int root = 0;
    HighSolution winner1, winner2;
};

/// Full four-phase recovery. Medium candidates are consumed lazily in
/// diagonal order; for each coprime split (h ascending) and each square root
/// (smaller first), the shared high-level solver runs on N1 and N2
/// independently and the first branch whose candidates verify
/// p_i * q_i = N_i wins.
inline std::optional<TsbFactors>
tsb_recover(const Natural& n1, const Natural& n2, const Natural& t,
            const Natural& b, std::uint64_t k_max,
            TsbRecoveryTrace* trace = nullptr,
            const TsbRecoverOptions& opts = {}) {
    detail::require_coprime_to_t(n1, n2, t);
    detail::MediumScan scan(n1, n2, t, b, k_max);
    while (auto cand =
               scan.next(trace ? &trace->medium_over_threshold : nullptr)) {
        if (trace)
            trace->medium_accepted.push_back(*cand);
        const auto low = tsb_recover_low(n1, n2, t, *cand, k_max, opts);
        if (low.empty())
            continue;
        const auto roots = sqrt_mod(cand->g, t);
        if (!roots)
            continue;  // cannot happen: the medium scan only keeps residues
        const Natural gammas[2] = {roots->first, roots->second};
        for (const auto& split : low) {
            if (trace)
                ++trace->splits_examined;
            for (int ri = 0; ri < 2; ++ri) {
                if (trace)
                    ++trace->branches_examined;
                const auto res = tsb_branch_residues(split.h, split.k1,
                                                     split.k2, gammas[ri], t);
                if (!res)
                    continue;
                const auto sols1 = ssb_recover_high(n1, t, res->p1_mod, res->q1_mod);
                if (sols1.empty())
                    continue;
                const auto sols2 = ssb_recover_high(n2, t, res->p2_mod, res->q2_mod);
                if (sols2.empty())
                    continue;
                for (const auto& s1 : sols1) {
                    const Natural p1 = s1.pi * t + res->p1_mod;
                    const Natural q1 = s1.nu * t + res->q1_mod;
                    if (p1 <= 1 || q1 <= 1 || p1 * q1 != n1)
                        continue;
                    for (const auto& s2 : sols2) {
                        const Natural p2 = s2.pi * t + res->p2_mod;
                        const Natural q2 = s2.nu * t + res->q2_mod;
                        if (p2 <= 1 || q2 <= 1 || p2 * q2 != n2)
                            continue;
                        if (trace) {
                            trace->recovered = true;
                            trace->h = split.h;
                            trace->k1 = split.k1;
                            trace->k2 = split.k2;
                            trace->root = ri + 1;
                            trace->winner1 = s1;
                            trace->winner2 = s2;
                        }
                        return TsbFactors{p1, q1, p2, q2};
                    }
                }
            }
        }
    }
    return std::nullopt;
}

} // namespace escrow
