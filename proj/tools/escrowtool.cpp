// Command-line front end: generation of escrow-backdoored semi-primes,
// factor recovery from the designer prime, instance verification, RSA
// keypair assembly, and the K-sweep benchmark harness.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "escrow/escrow.hpp"

namespace {

using namespace escrow;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;  // not recovered / invariant failed / exhausted
constexpr int kExitUsage = 2;   // usage or parse errors

NumberFormat parse_format(const std::string& fmt) {
    if (fmt == "dec")
        return NumberFormat::dec;
    if (fmt == "hex")
        return NumberFormat::hex;
    throw domain_error("--format must be dec or hex");
}

/// Numerals on the command line: canonical decimal, 0x hex, or 2^k.
Natural parse_cli_natural(const std::string& text) {
    if (text.size() > 2 && text[0] == '2' && text[1] == '^') {
        const Natural exp = parse_natural(text.substr(2));
        if (!exp.fits_ulong_p() || mpz_get_ui(exp.get_mpz_t()) > 1000000)
            throw domain_error("exponent out of range in \"" + text + "\"");
        Natural out = 1;
        out <<= mpz_get_ui(exp.get_mpz_t());
        return out;
    }
    return parse_natural(text);
}

struct CommonParams {
    std::string kind;
    std::size_t alpha = 0;
    std::size_t c = 0;
    std::uint64_t k_max = 0;
};

void validate_sizes(const std::string& kind, std::size_t alpha, std::size_t c) {
    if (alpha < 32)
        throw domain_error("--alpha must be >= 32");
    if (c < 2)
        throw domain_error("--c must be >= 2");
    if (alpha <= 2 * c)
        throw domain_error("--alpha must exceed 2*c");
    if (alpha - c < 8)
        throw domain_error("--alpha - --c must be >= 8");
    if (c < 4 || c > 10)
        std::cerr << "warning: c = " << c
                  << " is outside the recommended range [4, 10]\n";
    (void)kind;
}

void validate_k(const std::string& kind, std::uint64_t k) {
    const std::uint64_t k_floor = kind == "tsb" ? 3 : 2;
    if (k < k_floor)
        throw domain_error("K must be >= " + std::to_string(k_floor));
}

void validate_params(const CommonParams& p) {
    validate_sizes(p.kind, p.alpha, p.c);
    validate_k(p.kind, p.k_max);
}

RandomSource make_rng(const std::optional<std::uint64_t>& seed) {
    if (seed)
        return RandomSource(*seed);
    return RandomSource::from_entropy();
}

std::string wit(std::uint64_t v) {
    return to_string(Natural(static_cast<unsigned long>(v)));
}

int cmd_keygen(const CommonParams& params, const std::optional<std::string>& b_text,
               const std::optional<std::uint64_t>& seed, const std::string& out_path,
               const std::string& fmt_text) {
    const NumberFormat fmt = parse_format(fmt_text);
    validate_params(params);
    RandomSource rng = make_rng(seed);
    const Natural t = random_prime(params.alpha - params.c, rng);

    InstanceFile file;
    file.alpha = params.alpha;
    file.c = params.c;
    file.k_max = params.k_max;

    if (params.kind == "ssb") {
        const EscrowKey key{t, SsbParams{params.alpha, params.c, params.k_max}};
        const SsbInstance inst = ssb_generate(key, rng);
        file.kind = InstanceKind::ssb;
        file.n = inst.n;
        file.ssb_secret = SsbSecret{t, inst.p, inst.q, inst.k};
        save_instance(out_path, file, /*include_secret=*/true, fmt);
        std::cout << "wrote " << out_path << " (ssb, alpha=" << params.alpha
                  << ", |N|=" << bitsize(inst.n) << " bits)\n";
    } else {
        const Natural b = b_text ? parse_cli_natural(*b_text)
                                 : default_b_threshold(params.alpha, params.c);
        const TsbParams tparams{params.alpha, params.c, params.k_max, b};
        if (b >= t)
            throw domain_error("b_threshold must be < T; got a larger value");
        const TsbInstance inst = tsb_generate(tparams, t, rng);
        file.kind = InstanceKind::tsb;
        file.b_threshold = b;
        file.n1 = inst.n1;
        file.n2 = inst.n2;
        file.tsb_secret =
            TsbSecret{t, inst.p1, inst.q1, inst.p2, inst.q2, inst.h, inst.k1, inst.k2};
        save_instance(out_path, file, /*include_secret=*/true, fmt);
        std::cout << "wrote " << out_path << " (tsb, alpha=" << params.alpha
                  << ", |N1|=" << bitsize(inst.n1)
                  << ", |N2|=" << bitsize(inst.n2) << " bits)\n";
    }
    return kExitOk;
}

int cmd_recover(const std::string& in_path, const std::string& t_text,
                const std::optional<std::string>& b_text,
                const std::optional<std::uint64_t>& k_max_flag,
                const std::string& out_path, const std::string& fmt_text) {
    const NumberFormat fmt = parse_format(fmt_text);
    const InstanceFile file = load_instance(in_path);
    const Natural t = parse_cli_natural(t_text);
    if (t < 3)
        throw domain_error("--t must be an odd prime");
    const std::uint64_t k_max = k_max_flag ? *k_max_flag : file.k_max;
    if (k_max < 2)
        throw domain_error("k_max must be >= 2 (flag or file params)");

    json out;
    if (file.kind == InstanceKind::ssb) {
        SsbRecoveryTrace trace;
        const auto rec = ssb_recover(file.n, t, k_max, &trace);
        if (!rec) {
            std::cerr << "not recovered: no branch verified (wrong T or N not "
                         "vulnerable with k <= " << k_max << ")\n";
            return kExitFailed;
        }
        out["kind"] = "ssb";
        out["factors"] = {{"p", to_string(rec->first, fmt)},
                          {"q", to_string(rec->second, fmt)}};
        out["witness"] = {{"k", wit(trace.k)}};
        out["trace"] = {{"low_candidates", trace.low.size()},
                        {"branches_examined", trace.branches.size()},
                        {"winner",
                         {{"k", wit(trace.k)},
                          {"root", trace.root},
                          {"pi", to_string(trace.winner.pi, fmt)},
                          {"nu", to_string(trace.winner.nu, fmt)}}}};
        std::cout << "p = " << to_string(rec->first, fmt) << "\n"
                  << "q = " << to_string(rec->second, fmt) << "\n";
    } else {
        Natural b;
        if (b_text)
            b = parse_cli_natural(*b_text);
        else if (file.b_threshold)
            b = *file.b_threshold;
        else
            throw domain_error("tsb recovery needs --b or b_threshold in the file");
        TsbRecoveryTrace trace;
        const auto rec = tsb_recover(file.n1, file.n2, t, b, k_max, &trace);
        if (!rec) {
            std::cerr << "not recovered: no branch verified (wrong T/B or pair "
                         "not vulnerable with k <= " << k_max << ")\n";
            return kExitFailed;
        }
        out["kind"] = "tsb";
        out["factors"] = {{"p1", to_string(rec->p1, fmt)},
                          {"q1", to_string(rec->q1, fmt)},
                          {"p2", to_string(rec->p2, fmt)},
                          {"q2", to_string(rec->q2, fmt)}};
        out["witness"] = {{"h", to_string(trace.h, fmt)},
                          {"k1", to_string(trace.k1, fmt)},
                          {"k2", to_string(trace.k2, fmt)}};
        out["trace"] = {{"medium_over_threshold", trace.medium_over_threshold.size()},
                        {"medium_accepted", trace.medium_accepted.size()},
                        {"splits_examined", trace.splits_examined},
                        {"branches_examined", trace.branches_examined},
                        {"winner",
                         {{"h", to_string(trace.h, fmt)},
                          {"k1", to_string(trace.k1, fmt)},
                          {"k2", to_string(trace.k2, fmt)},
                          {"root", trace.root},
                          {"pi1", to_string(trace.winner1.pi, fmt)},
                          {"nu1", to_string(trace.winner1.nu, fmt)},
                          {"pi2", to_string(trace.winner2.pi, fmt)},
                          {"nu2", to_string(trace.winner2.nu, fmt)}}}};
        std::cout << "p1 = " << to_string(rec->p1, fmt) << "\n"
                  << "q1 = " << to_string(rec->q1, fmt) << "\n"
                  << "p2 = " << to_string(rec->p2, fmt) << "\n"
                  << "q2 = " << to_string(rec->q2, fmt) << "\n";
    }

    std::ofstream os(out_path);
    if (!os)
        throw error("cannot open for writing: " + out_path);
    os << out.dump(2) << "\n";
    return kExitOk;
}

class Report {
public:
    void check(const std::string& name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
        all_ok_ = all_ok_ && ok;
    }
    bool all_ok() const { return all_ok_; }

private:
    bool all_ok_ = true;
};

bool size_close(const Natural& v, std::size_t bits) {
    const std::size_t got = bitsize(v);
    return got + 1 >= bits && got <= bits + 1;
}

int cmd_verify(const std::string& in_path) {
    const InstanceFile file = load_instance(in_path);
    Report rep;
    if (file.kind == InstanceKind::ssb) {
        if (!file.ssb_secret) {
            std::cerr << "verify: instance file has no secret section\n";
            return kExitUsage;
        }
        const auto& s = *file.ssb_secret;
        rep.check("N = p*q", file.n == s.p * s.q);
        rep.check("p is probable prime", is_probable_prime(s.p));
        rep.check("q is probable prime", is_probable_prime(s.q));
        rep.check("p != q", s.p != s.q);
        rep.check("bitsize(p) ~ alpha", size_close(s.p, file.alpha));
        rep.check("bitsize(q) ~ alpha", size_close(s.q, file.alpha));
        rep.check("bitsize(T) ~ alpha - c", size_close(s.t, file.alpha - file.c));
        rep.check("1 < k <= k_max", s.k > 1 && s.k <= file.k_max);
        rep.check("H0: p == k*q (mod T)",
                  s.t >= 3 &&
                      mod(s.p - Natural(static_cast<unsigned long>(s.k)) * s.q,
                          s.t) == 0);
    } else {
        if (!file.tsb_secret) {
            std::cerr << "verify: instance file has no secret section\n";
            return kExitUsage;
        }
        const auto& s = *file.tsb_secret;
        const Natural h(static_cast<unsigned long>(s.h));
        const Natural k1(static_cast<unsigned long>(s.k1));
        const Natural k2(static_cast<unsigned long>(s.k2));
        rep.check("N1 = p1*q1", file.n1 == s.p1 * s.q1);
        rep.check("N2 = p2*q2", file.n2 == s.p2 * s.q2);
        rep.check("gcd(N1, N2) = 1", gcd(file.n1, file.n2) == 1);
        rep.check("p1 is probable prime", is_probable_prime(s.p1));
        rep.check("q1 is probable prime", is_probable_prime(s.q1));
        rep.check("p2 is probable prime", is_probable_prime(s.p2));
        rep.check("q2 is probable prime", is_probable_prime(s.q2));
        rep.check("bitsize(p1) ~ alpha", size_close(s.p1, file.alpha));
        rep.check("bitsize(q1) ~ alpha", size_close(s.q1, file.alpha));
        rep.check("bitsize(p2) ~ alpha", size_close(s.p2, file.alpha));
        rep.check("bitsize(q2) ~ alpha", size_close(s.q2, file.alpha));
        rep.check("bitsize(T) ~ alpha - c", size_close(s.t, file.alpha - file.c));
        rep.check("witness ranges", s.h > 1 && s.h <= file.k_max && s.k1 > 1 &&
                                        s.k1 <= file.k_max && s.k2 > 1 &&
                                        s.k2 <= file.k_max);
        rep.check("H1: q2 == h^2*q1 (mod T)", mod(s.q2 - h * h * s.q1, s.t) == 0);
        rep.check("H2: p1 == h*k1*q2 (mod T)",
                  mod(s.p1 - h * k1 * s.q2, s.t) == 0);
        rep.check("H3: p2 == k2*q1 (mod T)", mod(s.p2 - k2 * s.q1, s.t) == 0);
        rep.check("H4: h, k1, k2 pairwise coprime",
                  gcd(h, k1) == 1 && gcd(h, k2) == 1 && gcd(k1, k2) == 1);
        rep.check("H5: h*k1 != k2 (mod T)", mod(h * k1 - k2, s.t) != 0);
        const Natural b = file.b_threshold ? *file.b_threshold : Natural(0);
        const Natural hq1 = mod(h * s.q1, s.t);
        rep.check("H6: (h*q1)^2 mod T > B", mulmod(hq1, hq1, s.t) > b);
        rep.check("B < T", b < s.t);
    }
    return rep.all_ok() ? kExitOk : kExitFailed;
}

int cmd_rsa_assemble(const std::string& p_text, const std::string& q_text,
                     const std::string& e_text, const std::string& fmt_text) {
    const NumberFormat fmt = parse_format(fmt_text);
    const Natural p = parse_cli_natural(p_text);
    const Natural q = parse_cli_natural(q_text);
    const Natural e = parse_cli_natural(e_text);
    const RsaKey key = rsa_assemble(p, q, e);
    std::cout << "N = " << to_string(key.n, fmt) << "\n"
              << "e = " << to_string(key.e, fmt) << "\n"
              << "d = " << to_string(key.d, fmt) << "\n";
    return kExitOk;
}

int cmd_bench(const CommonParams& params, const std::vector<std::uint64_t>& ks,
              std::uint64_t trials, const std::optional<std::uint64_t>& seed,
              const std::optional<std::string>& b_text, const std::string& out_path,
              bool parallel) {
    validate_sizes(params.kind, params.alpha, params.c);
    if (trials < 1)
        throw domain_error("--trials must be >= 1");
    if (ks.empty())
        throw domain_error("at least one --k value is required");
    for (std::uint64_t k : ks)
        validate_k(params.kind, k);

    BenchConfig cfg;
    cfg.kind = params.kind == "ssb" ? BackdoorKind::ssb : BackdoorKind::tsb;
    cfg.alpha = params.alpha;
    cfg.c = params.c;
    cfg.k_values = ks;
    cfg.trials = trials;
    cfg.seed = seed ? *seed : RandomSource::from_entropy().u64();
    if (b_text)
        cfg.b_threshold = parse_cli_natural(*b_text);
    cfg.parallel = parallel;

    const auto rows = run_bench(cfg);
    std::ofstream os(out_path);
    if (!os)
        throw error("cannot open for writing: " + out_path);
    write_bench_csv(os, rows);

    bool all_ok = true;
    for (const auto& row : rows)
        all_ok = all_ok && row.ok;
    std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
    if (!all_ok) {
        std::cerr << "bench: at least one trial failed to recover\n";
        return kExitFailed;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Escrow-key semi-prime backdoors: generation, recovery, "
                 "verification, and benchmarks"};
    app.require_subcommand(1);

    std::string kind, in_path, out_path, t_text, p_text, q_text;
    std::string e_text = "65537";
    std::string fmt_text = "dec";
    std::size_t alpha = 0, c = 0;
    std::uint64_t k_max = 0, trials = 20;
    std::optional<std::uint64_t> seed, k_max_flag;
    std::optional<std::string> b_text;
    std::vector<std::uint64_t> k_values;
    bool parallel = false;

    auto* keygen = app.add_subcommand("keygen", "Generate a vulnerable instance");
    keygen->add_option("kind", kind, "ssb or tsb")
        ->required()
        ->check(CLI::IsMember({"ssb", "tsb"}));
    keygen->add_option("--alpha", alpha, "factor bitsize")->required();
    keygen->add_option("--c", c, "escrow-key size deficit in bits")->required();
    keygen->add_option("--kmax", k_max, "coefficient bound K")->required();
    keygen->add_option("--b", b_text, "detection threshold B (tsb; default 2^(alpha-2c))");
    keygen->add_option("--seed", seed, "deterministic RNG seed");
    keygen->add_option("--out", out_path, "instance file to write")->required();
    keygen->add_option("--format", fmt_text, "numeral format: dec or hex");

    auto* recover = app.add_subcommand("recover", "Recover factors from N(s) and T");
    recover->add_option("--in", in_path, "public instance file")->required();
    recover->add_option("--t", t_text, "designer prime T")->required();
    recover->add_option("--b", b_text, "detection threshold B override");
    recover->add_option("--kmax", k_max_flag, "coefficient bound K override");
    recover->add_option("--out", out_path, "recovery result file")->required();
    recover->add_option("--format", fmt_text, "numeral format: dec or hex");

    auto* verify = app.add_subcommand("verify", "Check every instance invariant");
    verify->add_option("--in", in_path, "instance file with secret section")->required();

    auto* rsa = app.add_subcommand("rsa-assemble", "Build an RSA keypair from p, q");
    rsa->add_option("--p", p_text, "first prime")->required();
    rsa->add_option("--q", q_text, "second prime")->required();
    rsa->add_option("--e", e_text, "public exponent (default 65537)");
    rsa->add_option("--format", fmt_text, "numeral format: dec or hex");

    auto* bench = app.add_subcommand("bench", "K-sweep generate+recover timings");
    bench->add_option("kind", kind, "ssb or tsb")
        ->required()
        ->check(CLI::IsMember({"ssb", "tsb"}));
    bench->add_option("--alpha", alpha, "factor bitsize")->required();
    bench->add_option("--c", c, "escrow-key size deficit in bits")->required();
    bench->add_option("--k", k_values, "K values to sweep (repeat or comma-separate)")
        ->required()
        ->delimiter(',');
    bench->add_option("--trials", trials, "trials per K (default 20)");
    bench->add_option("--seed", seed, "deterministic RNG seed");
    bench->add_option("--b", b_text, "detection threshold B (tsb)");
    bench->add_option("--out", out_path, "CSV file to write")->required();
    bench->add_flag("--parallel", parallel, "run trials concurrently");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "escrowtool: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (keygen->parsed())
            return cmd_keygen(CommonParams{kind, alpha, c, k_max}, b_text, seed,
                              out_path, fmt_text);
        if (recover->parsed())
            return cmd_recover(in_path, t_text, b_text, k_max_flag, out_path,
                               fmt_text);
        if (verify->parsed())
            return cmd_verify(in_path);
        if (rsa->parsed())
            return cmd_rsa_assemble(p_text, q_text, e_text, fmt_text);
        if (bench->parsed())
            return cmd_bench(CommonParams{kind, alpha, c, k_max}, k_values, trials,
                             seed, b_text, out_path, parallel);
    } catch (const trivial_factor_error& e) {
        std::cerr << "escrowtool: trivial factor: gcd with T = " << e.gcd()
                  << " (" << e.what() << ")\n";
        return kExitFailed;
    } catch (const domain_error& e) {
        std::cerr << "escrowtool: " << e.what() << "\n";
        return kExitUsage;
    } catch (const parse_error& e) {
        std::cerr << "escrowtool: " << e.what() << "\n";
        return kExitUsage;
    } catch (const not_coprime_error& e) {
        std::cerr << "escrowtool: " << e.what() << "\n";
        return kExitFailed;
    } catch (const exhausted_error& e) {
        std::cerr << "escrowtool: " << e.what() << "\n";
        return kExitFailed;
    } catch (const error& e) {
        std::cerr << "escrowtool: " << e.what() << "\n";
        return kExitFailed;
    }
    return kExitUsage;
}
