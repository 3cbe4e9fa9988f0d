#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <thread>
#include <tuple>
#include <vector>

#include "escrow/errors.hpp"
#include "escrow/natural.hpp"
#include "escrow/numtheory.hpp"
#include "escrow/random.hpp"
#include "escrow/ssb.hpp"
#include "escrow/tsb.hpp"

namespace escrow {

enum class BackdoorKind { ssb, tsb };

/// One K-sweep row: wall-clock seconds for generation (designer prime plus
/// instance) and recovery, averaged over the configured trial count.
struct BenchRecord {
    std::uint64_t k = 0;
    double gen_avg = 0, gen_std = 0, rec_avg = 0, rec_std = 0;
    bool ok = false;  // every trial generated and recovered successfully
};

struct BenchConfig {
    BackdoorKind kind = BackdoorKind::ssb;
    std::size_t alpha = 0;
    std::size_t c = 0;
    std::vector<std::uint64_t> k_values;
    std::uint64_t trials = 20;
    std::uint64_t seed = 0;
    std::optional<Natural> b_threshold;  // tsb only; default 2^(alpha-2c)
    bool parallel = false;               // opt-in parallel trials
};

namespace detail {

struct TrialSample {
    double gen_s = 0, rec_s = 0;
    bool ok = false;
};

inline TrialSample run_trial(const BenchConfig& cfg, std::uint64_t k,
                             std::uint64_t trial_seed) {
    using clock = std::chrono::steady_clock;
    TrialSample sample;
    RandomSource rng(trial_seed);
    try {
        if (cfg.kind == BackdoorKind::ssb) {
            const auto gen_start = clock::now();
            EscrowKey key{random_prime(cfg.alpha - cfg.c, rng),
                          SsbParams{cfg.alpha, cfg.c, k}};
            const SsbInstance inst = ssb_generate(key, rng);
            sample.gen_s = std::chrono::duration<double>(clock::now() - gen_start).count();

            const auto rec_start = clock::now();
            const auto rec = ssb_recover(inst.n, key.t, k);
            sample.rec_s = std::chrono::duration<double>(clock::now() - rec_start).count();
            sample.ok = rec && ((rec->first == inst.p && rec->second == inst.q) ||
                                (rec->first == inst.q && rec->second == inst.p));
        } else {
            TsbParams params{cfg.alpha, cfg.c, k,
                             cfg.b_threshold ? *cfg.b_threshold
                                             : default_b_threshold(cfg.alpha, cfg.c)};
            const auto gen_start = clock::now();
            const Natural t = random_prime(cfg.alpha - cfg.c, rng);
            const TsbInstance inst = tsb_generate(params, t, rng);
            sample.gen_s = std::chrono::duration<double>(clock::now() - gen_start).count();

            const auto rec_start = clock::now();
            const auto rec = tsb_recover(inst.n1, inst.n2, t, params.b_threshold, k);
            sample.rec_s = std::chrono::duration<double>(clock::now() - rec_start).count();
            const auto same_pair = [](const Natural& a, const Natural& b,
                                      const Natural& x, const Natural& y) {
                return (a == x && b == y) || (a == y && b == x);
            };
            sample.ok = rec && same_pair(rec->p1, rec->q1, inst.p1, inst.q1) &&
                        same_pair(rec->p2, rec->q2, inst.p2, inst.q2);
        }
    } catch (const error&) {
        sample.ok = false;
    }
    return sample;
}

inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t k,
                                std::uint64_t trial) {
    std::uint64_t state = base ^ (k * 0x9e3779b97f4a7c15ULL) ^ (trial << 32);
    splitmix64(state);
    return splitmix64(state);
}

// Population standard deviation, so a single trial reports 0.
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
    double mean = 0;
    for (double x : xs)
        mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0;
    for (double x : xs)
        var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

} // namespace detail

inline std::vector<BenchRecord> run_bench(const BenchConfig& cfg) {
    if (cfg.trials < 1)
        throw domain_error("run_bench: trials must be >= 1");
    if (cfg.k_values.empty())
        throw domain_error("run_bench: no K values given");

    std::vector<BenchRecord> out;
    for (std::uint64_t k : cfg.k_values) {
        std::vector<detail::TrialSample> samples(cfg.trials);
        if (cfg.parallel) {
            std::vector<std::future<detail::TrialSample>> futs;
            futs.reserve(cfg.trials);
            for (std::uint64_t trial = 0; trial < cfg.trials; ++trial)
                futs.push_back(std::async(std::launch::async, detail::run_trial,
                                          cfg, k,
                                          detail::trial_seed(cfg.seed, k, trial)));
            for (std::uint64_t trial = 0; trial < cfg.trials; ++trial)
                samples[trial] = futs[trial].get();
        } else {
            for (std::uint64_t trial = 0; trial < cfg.trials; ++trial)
                samples[trial] =
                    detail::run_trial(cfg, k, detail::trial_seed(cfg.seed, k, trial));
        }

        BenchRecord rec;
        rec.k = k;
        rec.ok = true;
        std::vector<double> gen, recov;
        for (const auto& s : samples) {
            rec.ok = rec.ok && s.ok;
            gen.push_back(s.gen_s);
            recov.push_back(s.rec_s);
        }
        std::tie(rec.gen_avg, rec.gen_std) = detail::mean_std(gen);
        std::tie(rec.rec_avg, rec.rec_std) = detail::mean_std(recov);
        out.push_back(rec);
    }
    return out;
}

/// CSV with header `K,gen_avg,gen_std,rec_avg,rec_std`; seconds with three
/// decimal places. Failed rows carry "failed" in every value column.
inline void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& rows) {
    os << "K,gen_avg,gen_std,rec_avg,rec_std\n";
    for (const auto& row : rows) {
        if (!row.ok) {
            os << row.k << ",failed,failed,failed,failed\n";
            continue;
        }
        os << row.k << ',' << std::fixed << std::setprecision(3) << row.gen_avg
           << ',' << row.gen_std << ',' << row.rec_avg << ',' << row.rec_std
           << '\n';
    }
}

} // namespace escrow
