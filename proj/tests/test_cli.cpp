#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "escrow/escrow.hpp"

#include "golden.hpp"

using namespace escrow;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

class Sandbox {
public:
    Sandbox() {
        dir_ = fs::temp_directory_path() /
               ("escrowtool_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter_++));
        fs::create_directories(dir_);
    }
    ~Sandbox() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    fs::path path(const std::string& name) const { return dir_ / name; }

    RunResult run(const std::string& args) const {
        const fs::path out = dir_ / "stdout.txt";
        const fs::path err = dir_ / "stderr.txt";
        const std::string cmd = std::string(ESCROWTOOL_PATH) + " " + args +
                                " > " + out.string() + " 2> " + err.string();
        const int status = std::system(cmd.c_str());
        RunResult res;
        res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        res.out = slurp(out);
        res.err = slurp(err);
        return res;
    }

private:
    fs::path dir_;
    static inline int counter_ = 0;
};

} // namespace

TEST_CASE("keygen / verify / recover round trip over the CLI", "[cli]") {
    Sandbox sb;
    const auto inst = sb.path("inst.json");

    auto gen = sb.run("keygen ssb --alpha 16 --c 5 --kmax 16 --seed 7 --out " +
                      inst.string());
    CHECK(gen.exit_code == 2);  // below the alpha floor

    gen = sb.run("keygen ssb --alpha 64 --c 5 --kmax 16 --seed 7 --out " +
                 inst.string());
    REQUIRE(gen.exit_code == 0);

    const auto ver = sb.run("verify --in " + inst.string());
    CHECK(ver.exit_code == 0);
    CHECK(ver.out.find("FAIL") == std::string::npos);
    CHECK(ver.out.find("H0") != std::string::npos);

    const InstanceFile file = load_instance(inst.string());
    REQUIRE(file.ssb_secret.has_value());
    const std::string t = to_string(file.ssb_secret->t);

    const auto recov = sb.path("rec.json");
    const auto rec = sb.run("recover --in " + inst.string() + " --t " + t +
                            " --out " + recov.string());
    REQUIRE(rec.exit_code == 0);
    CHECK(rec.out.find(to_string(file.ssb_secret->p)) != std::string::npos);
    CHECK(rec.out.find(to_string(file.ssb_secret->q)) != std::string::npos);
    CHECK(slurp(recov).find("\"low_candidates\"") != std::string::npos);

    // a wrong T must fail with exit 1
    const std::string wrong_t = to_string(file.ssb_secret->t + 2);
    const auto bad = sb.run("recover --in " + inst.string() + " --t " + wrong_t +
                            " --out " + sb.path("rec2.json").string());
    CHECK(bad.exit_code == 1);
}

TEST_CASE("tsb keygen defaults the detection threshold", "[cli]") {
    Sandbox sb;
    const auto inst = sb.path("tsb.json");
    const auto gen = sb.run("keygen tsb --alpha 64 --c 3 --kmax 100 --seed 3 --out " +
                            inst.string());
    REQUIRE(gen.exit_code == 0);
    CHECK(gen.err.find("warning") != std::string::npos);  // c outside [4, 10]

    const InstanceFile file = load_instance(inst.string());
    REQUIRE(file.b_threshold.has_value());
    CHECK(*file.b_threshold == Natural(1) << 58);  // 2^(64 - 2*3)
    REQUIRE(file.tsb_secret.has_value());

    const auto ver = sb.run("verify --in " + inst.string());
    CHECK(ver.exit_code == 0);

    const auto rec = sb.run("recover --in " + inst.string() + " --t " +
                            to_string(file.tsb_secret->t) + " --out " +
                            sb.path("rec.json").string());
    REQUIRE(rec.exit_code == 0);
    CHECK(rec.out.find(to_string(file.tsb_secret->p1)) != std::string::npos);
    CHECK(rec.out.find(to_string(file.tsb_secret->q2)) != std::string::npos);
}

TEST_CASE("verify flags tampered instances", "[cli]") {
    Sandbox sb;
    const auto inst = sb.path("inst.json");
    REQUIRE(sb.run("keygen ssb --alpha 64 --c 5 --kmax 16 --seed 11 --out " +
                   inst.string())
                .exit_code == 0);

    InstanceFile file = load_instance(inst.string());
    REQUIRE(file.ssb_secret.has_value());
    file.ssb_secret->q += 2;
    file.n = file.ssb_secret->p * file.ssb_secret->q;
    save_instance(inst.string(), file, true);

    const auto ver = sb.run("verify --in " + inst.string());
    CHECK(ver.exit_code == 1);
    CHECK(ver.out.find("FAIL") != std::string::npos);

    // strip the secret: verify must refuse with a usage error
    save_instance(inst.string(), file, false);
    CHECK(sb.run("verify --in " + inst.string()).exit_code == 2);
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
    Sandbox sb;
    CHECK(sb.run("keygen ssb --c 5 --kmax 16 --out x.json").exit_code == 2);
    CHECK(sb.run("keygen xxx --alpha 64 --c 5 --kmax 16 --out x.json").exit_code == 2);
    CHECK(sb.run("recover --t 11 --out x.json").exit_code == 2);
    CHECK(sb.run("").exit_code == 2);
    CHECK(sb.run("bench ssb --alpha 64 --c 5 --out x.csv").exit_code == 2);
    CHECK(sb.run("--help").exit_code == 0);

    const auto missing = sb.run("recover --in " + sb.path("nope.json").string() +
                                " --t 11 --out x.json");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("rsa-assemble prints the keypair", "[cli]") {
    Sandbox sb;
    const auto ok = sb.run("rsa-assemble --p 61 --q 53 --e 17");
    REQUIRE(ok.exit_code == 0);
    CHECK(ok.out.find("3233") != std::string::npos);
    CHECK(ok.out.find("2753") != std::string::npos);

    CHECK(sb.run("rsa-assemble --p 61 --q 61 --e 17").exit_code == 2);
    CHECK(sb.run("rsa-assemble --p 7 --q 13 --e 3").exit_code == 1);

    const auto hex = sb.run("rsa-assemble --p 61 --q 53 --e 17 --format hex");
    REQUIRE(hex.exit_code == 0);
    CHECK(hex.out.find("0xca1") != std::string::npos);  // 3233
}

TEST_CASE("bench writes the CSV sweep", "[cli]") {
    Sandbox sb;
    const auto csv = sb.path("sweep.csv");
    const auto run = sb.run("bench ssb --alpha 64 --c 5 --k 8,16 --trials 2 "
                            "--seed 5 --out " + csv.string());
    REQUIRE(run.exit_code == 0);
    const std::string text = slurp(csv);
    CHECK(text.rfind("K,gen_avg,gen_std,rec_avg,rec_std\n", 0) == 0);
    CHECK(text.find("\n8,") != std::string::npos);
    CHECK(text.find("\n16,") != std::string::npos);
}

TEST_CASE("recover reproduces the reference ssb example from a file", "[cli]") {
    Sandbox sb;
    const std::string inst =
        std::string(TEST_DATA_DIR) + "/ssb_example_public.json";
    const InstanceFile pub = load_instance(inst);
    CHECK(pub.n == golden::kSsbN);
    CHECK_FALSE(pub.ssb_secret.has_value());

    const auto rec = sb.run("recover --in " + inst + " --t " +
                            to_string(golden::kSsbT) + " --out " +
                            sb.path("rec.json").string());
    REQUIRE(rec.exit_code == 0);
    CHECK(rec.out.find(to_string(golden::kSsbP)) != std::string::npos);
    CHECK(rec.out.find(to_string(golden::kSsbQ)) != std::string::npos);

    const std::string trace = slurp(sb.path("rec.json"));
    CHECK(trace.find("\"low_candidates\": 14") != std::string::npos);
    CHECK(trace.find("\"k\": \"9\"") != std::string::npos);
}

TEST_CASE("recover reproduces the reference tsb example from a file", "[cli]") {
    Sandbox sb;
    const std::string inst =
        std::string(TEST_DATA_DIR) + "/tsb_example_public.json";
    const InstanceFile pub = load_instance(inst);
    CHECK(pub.n1 == golden::kTsbN1);
    CHECK(pub.b_threshold == golden::kTsbB);

    // pass B explicitly as 2^57, overriding (and agreeing with) the file
    const auto rec = sb.run("recover --in " + inst + " --t " +
                            to_string(golden::kTsbT) + " --b 2^57 --out " +
                            sb.path("rec.json").string());
    REQUIRE(rec.exit_code == 0);
    for (const Natural* v : {&golden::kTsbP1, &golden::kTsbQ1, &golden::kTsbP2,
                             &golden::kTsbQ2})
        CHECK(rec.out.find(to_string(*v)) != std::string::npos);
}

TEST_CASE("recover reports a trivial factor", "[cli]") {
    Sandbox sb;
    RandomSource rng(2);
    const Natural t = random_prime(24, rng);
    InstanceFile pub;
    pub.kind = InstanceKind::ssb;
    pub.alpha = 48;
    pub.c = 5;
    pub.k_max = 8;
    pub.n = t * random_prime(48, rng);
    const auto inst = sb.path("trivial.json");
    save_instance(inst.string(), pub, false);

    const auto rec = sb.run("recover --in " + inst.string() + " --t " +
                            to_string(t) + " --out " + sb.path("r.json").string());
    CHECK(rec.exit_code == 1);
    CHECK(rec.err.find("trivial factor") != std::string::npos);
    CHECK(rec.err.find(to_string(t)) != std::string::npos);
}
