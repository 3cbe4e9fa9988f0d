#include <catch2/catch_amalgamated.hpp>

#include <regex>
#include <sstream>

#include "escrow/bench.hpp"

using namespace escrow;

TEST_CASE("ssb bench sweep produces one well-formed row per K", "[bench]") {
    BenchConfig cfg;
    cfg.kind = BackdoorKind::ssb;
    cfg.alpha = 64;
    cfg.c = 5;
    cfg.k_values = {8, 16};
    cfg.trials = 2;
    cfg.seed = 31337;

    const auto rows = run_bench(cfg);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.ok);
        CHECK(row.gen_avg >= 0.0);
        CHECK(row.rec_avg >= 0.0);
        CHECK(row.gen_std >= 0.0);
        CHECK(row.rec_std >= 0.0);
    }
    CHECK(rows[0].k == 8);
    CHECK(rows[1].k == 16);

    std::ostringstream csv;
    write_bench_csv(csv, rows);
    std::istringstream lines(csv.str());
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "K,gen_avg,gen_std,rec_avg,rec_std");
    const std::regex row_re(R"(^\d+,\d+\.\d{3},\d+\.\d{3},\d+\.\d{3},\d+\.\d{3}$)");
    int count = 0;
    while (std::getline(lines, line)) {
        CHECK(std::regex_match(line, row_re));
        ++count;
    }
    CHECK(count == 2);
}

TEST_CASE("a single trial reports zero standard deviation", "[bench]") {
    BenchConfig cfg;
    cfg.kind = BackdoorKind::tsb;
    cfg.alpha = 40;
    cfg.c = 4;
    cfg.k_values = {12};
    cfg.trials = 1;
    cfg.seed = 9;

    const auto rows = run_bench(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ok);
    CHECK(rows[0].gen_std == 0.0);
    CHECK(rows[0].rec_std == 0.0);
}

TEST_CASE("parallel trials aggregate the same trial set", "[bench]") {
    BenchConfig cfg;
    cfg.kind = BackdoorKind::ssb;
    cfg.alpha = 48;
    cfg.c = 5;
    cfg.k_values = {8};
    cfg.trials = 4;
    cfg.seed = 77;
    cfg.parallel = true;

    const auto rows = run_bench(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ok);
}

TEST_CASE("bench rejects empty sweeps", "[bench]") {
    BenchConfig cfg;
    cfg.kind = BackdoorKind::ssb;
    cfg.alpha = 48;
    cfg.c = 5;
    cfg.trials = 1;
    CHECK_THROWS_AS(run_bench(cfg), domain_error);
    cfg.k_values = {8};
    cfg.trials = 0;
    CHECK_THROWS_AS(run_bench(cfg), domain_error);
}

TEST_CASE("failed rows are marked in the CSV", "[bench]") {
    std::vector<BenchRecord> rows(1);
    rows[0].k = 5;
    rows[0].ok = false;
    std::ostringstream csv;
    write_bench_csv(csv, rows);
    CHECK(csv.str() ==
          "K,gen_avg,gen_std,rec_avg,rec_std\n5,failed,failed,failed,failed\n");
}
