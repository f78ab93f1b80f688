#include <catch2/catch_amalgamated.hpp>

#include "fpsketch/generators.hpp"
#include "fpsketch/oracle.hpp"

using namespace fpsketch;

TEST_CASE("exact_fp: zero vector and single coordinate") {
    CHECK(oracle::exact_fp(std::vector<double>(16, 0.0), 3.0) == 0.0);
    std::vector<double> x(8, 0.0);
    x[5] = 2.0;
    CHECK(oracle::exact_fp(x, 3.0) == 8.0);
}

TEST_CASE("exact_fp: matches extended-precision recomputation") {
    std::vector<double> x = {3, -7, 2, 9, -4, 1, 6, -8, 5, -2};
    for (double p : {2.5, 3.0, 4.0}) {
        long double ref = 0.0L;
        for (double v : x) ref += powl(fabsl((long double)v), (long double)p);
        double got = oracle::exact_fp(x, p);
        CHECK(std::abs(got - (double)ref) <= 1e-12 * (double)ref);
    }
}

TEST_CASE("exact_f2_res: boundary cases and tie-breaking") {
    std::vector<double> x = {3, 2, 2, 1};
    CHECK(oracle::exact_f2_res(x, 0) == oracle::exact_fp(x, 2.0));
    CHECK(oracle::exact_f2_res(x, 4) == 0.0);
    // Top-2 drops 3 and the *earlier* 2; the tail is 2^2 + 1^2.
    CHECK(oracle::exact_f2_res(x, 2) == 5.0);
}

TEST_CASE("exact_f2_res: monotone decreasing in k") {
    GaussianStream g(4);
    std::vector<double> x(64);
    for (auto& v : x) v = g.next();
    double prev = oracle::exact_f2_res(x, 0);
    for (size_t k = 1; k <= 64; ++k) {
        double cur = oracle::exact_f2_res(x, k);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("accumulate_stream: aggregation and error paths") {
    CHECK(oracle::accumulate_stream({}, 4) == std::vector<double>(4, 0.0));
    auto x = oracle::accumulate_stream({{2, 5.0}, {2, -5.0}}, 4);
    CHECK(x == std::vector<double>(4, 0.0));
    CHECK_THROWS_AS(oracle::accumulate_stream({{4, 1.0}}, 4), ConfigError);

    // Random stream vs an independent per-index tally.
    std::vector<std::pair<uint64_t, double>> updates;
    GaussianStream g(9);
    for (int t = 0; t < 500; ++t) updates.emplace_back(prf64(3, t) % 32, g.next());
    auto acc = oracle::accumulate_stream(updates, 32);
    std::vector<double> tally(32, 0.0);
    for (auto& [i, v] : updates) tally[i] += v;
    for (size_t i = 0; i < 32; ++i) CHECK(acc[i] == Catch::Approx(tally[i]).margin(1e-12));
}
