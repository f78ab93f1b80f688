#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <fstream>
#include <sstream>

#include "fpsketch/kwise.hpp"
#include "test_util.hpp"

using namespace fpsketch;

TEST_CASE("prime utilities") {
    CHECK(is_prime_u64(2));
    CHECK(is_prime_u64((uint64_t(1) << 31) + 11));
    CHECK_FALSE(is_prime_u64(1));
    CHECK_FALSE(is_prime_u64((uint64_t(1) << 31)));
    uint64_t p = next_prime_above(uint64_t(1) << 31);
    CHECK(p > (uint64_t(1) << 31));
    CHECK(is_prime_u64(p));
}

TEST_CASE("kwise: zero polynomial maps everything to zero") {
    auto h = KWiseHash::with_coefficients({0, 0, 0}, next_prime_above(uint64_t(1) << 31), 1000, 16);
    for (uint64_t i : {0ULL, 1ULL, 17ULL, 999ULL}) CHECK(h.eval(i) == 0);
}

TEST_CASE("kwise: identity polynomial") {
    auto h = KWiseHash::with_coefficients({0, 1}, 101, 101, 101);
    CHECK(h.eval(5) == 5);
    CHECK(h.eval(100) == 100);
}

TEST_CASE("kwise: determinism across instances") {
    KWiseHash a(7, 4, 100, 16);
    KWiseHash b(7, 4, 100, 16);
    for (uint64_t i = 0; i < 100; ++i) CHECK(a.eval(i) == b.eval(i));
    CHECK(a.eval(42) == b.eval(42));
}

TEST_CASE("kwise: rejects bad parameters and out-of-domain evals") {
    CHECK_THROWS_AS(KWiseHash(1, 0, 100, 16), ConfigError);
    CHECK_THROWS_AS(KWiseHash(1, 2, 100, 0), ConfigError);
    KWiseHash h(1, 2, 100, 16);
    CHECK_THROWS_AS(h.eval(100), ConfigError);
}

TEST_CASE("kwise: pairwise collision rate matches uniform hashing") {
    // All pairs in [0, 256), range 16; expected rate 1/16. The 0.004 window
    // is three binomial sigmas on the per-seed count, and averaging over 40
    // seeds leaves plenty of slack.
    const uint64_t domain = 256;
    const uint64_t range = 16;
    std::vector<double> rates;
    for (uint64_t seed = 0; seed < 40; ++seed) {
        KWiseHash h(seed, 2, domain, range);
        std::vector<uint64_t> vals(domain);
        for (uint64_t i = 0; i < domain; ++i) vals[i] = h.eval(i);
        uint64_t collisions = 0, pairs = 0;
        for (uint64_t a = 0; a < domain; ++a) {
            for (uint64_t b = a + 1; b < domain; ++b) {
                ++pairs;
                if (vals[a] == vals[b]) ++collisions;
            }
        }
        rates.push_back(static_cast<double>(collisions) / static_cast<double>(pairs));
    }
    CHECK(std::abs(testutil::mean(rates) - 1.0 / 16.0) < 0.004);
}

TEST_CASE("kwise: frozen regression vector") {
    // Generated once from this implementation (seed 20240801, k=6,
    // domain=4096, range=257) and frozen as a compatibility check.
    std::ifstream in(std::string(TEST_DATA_DIR) + "/kwise_reference.txt");
    REQUIRE(in.good());
    KWiseHash h(20240801, 6, 4096, 257);
    uint64_t i, expect;
    size_t checked = 0;
    while (in >> i >> expect) {
        CHECK(h.eval(i) == expect);
        ++checked;
    }
    CHECK(checked >= 64);
}

TEST_CASE("roots: explicit zeroth and quarter-turn roots") {
    auto zero_hash = KWiseHash::with_coefficients({0}, 101, 100, 4);
    auto f0 = RootsFamily::with_index_hash(zero_hash);
    CHECK(std::abs(f0.root(7) - std::complex<double>(1.0, 0.0)) < 1e-12);

    auto one_hash = KWiseHash::with_coefficients({1}, 101, 100, 4);
    auto f1 = RootsFamily::with_index_hash(one_hash);
    CHECK(std::abs(f1.root(7) - std::complex<double>(0.0, 1.0)) < 1e-12);
}

TEST_CASE("roots: unit modulus and conjugate inverse") {
    RootsFamily f(3, 6, 4096, 8);
    for (uint64_t i = 0; i < 512; ++i) {
        auto w = f.root(i);
        CHECK(std::abs(std::abs(w) - 1.0) < 1e-12);
        CHECK(std::abs(w * std::conj(w) - 1.0) < 1e-12);
    }
}

TEST_CASE("roots: analytic cancellation of the full root table") {
    for (uint64_t q : {8ULL, 64ULL, 257ULL}) {
        RootsFamily f(11, 6, 4096, q);
        std::complex<double> acc{0.0, 0.0};
        for (const auto& w : f.table()) acc += w;
        CHECK(std::abs(acc) < 1e-12);
    }
}

TEST_CASE("roots: exhaustive E[w(i)^v] is near zero for v = 1..3") {
    const uint64_t domain = 4096;
    RootsFamily f(5, 6, domain, 8);
    for (int v = 1; v <= 3; ++v) {
        std::complex<double> acc{0.0, 0.0};
        for (uint64_t i = 0; i < domain; ++i) acc += std::pow(f.root(i), v);
        acc /= static_cast<double>(domain);
        CHECK(std::abs(acc) <= 0.1);
    }
}

TEST_CASE("subsample: level 0 holds everything") {
    SubsampleFamily g(9, 6, 1 << 16, 8);
    for (uint64_t i : {0ULL, 5ULL, 65535ULL}) CHECK(g.member(i, 0));
    CHECK_THROWS_AS(g.member(0, 9), ConfigError);
}

TEST_CASE("subsample: exhaustive membership probability at level 3") {
    const uint64_t domain = 1 << 16;
    SubsampleFamily g(4, 6, domain, 8);
    uint64_t count = 0;
    for (uint64_t i = 0; i < domain; ++i) {
        if (g.member(i, 3)) ++count;
    }
    double rate = static_cast<double>(count) / static_cast<double>(domain);
    CHECK(std::abs(rate - 0.125) <= 0.01);
}

TEST_CASE("subsample: membership is monotone in level") {
    const uint64_t domain = 1 << 12;
    SubsampleFamily g(7, 6, domain, 6);
    for (uint64_t i = 0; i < domain; ++i) {
        for (uint32_t l = 0; l < 6; ++l) {
            if (!g.member(i, l)) CHECK_FALSE(g.member(i, l + 1));
        }
    }
}

TEST_CASE("coin: deterministic and unbiased") {
    const uint64_t domain = 1 << 16;
    uint64_t heads = 0;
    for (uint64_t i = 0; i < domain; ++i) {
        int c = coin(77, i);
        CHECK(c == coin(77, i));
        heads += static_cast<uint64_t>(c);
    }
    double bias = std::abs(static_cast<double>(heads) / domain - 0.5);
    CHECK(bias <= 0.01);
}

TEST_CASE("coin: frozen regression vector") {
    std::ifstream in(std::string(TEST_DATA_DIR) + "/coin_reference.txt");
    REQUIRE(in.good());
    uint64_t i, expect;
    size_t checked = 0;
    while (in >> i >> expect) {
        CHECK(static_cast<uint64_t>(coin(20240801, i)) == expect);
        ++checked;
    }
    CHECK(checked >= 64);
}

TEST_CASE("kwise: PRF mode is deterministic and in range") {
    KWiseHash a(123, 8, 1 << 20, 6151, true);
    KWiseHash b(123, 8, 1 << 20, 6151, true);
    for (uint64_t i = 0; i < 2048; ++i) {
        uint64_t v = a.eval(i);
        CHECK(v == b.eval(i));
        CHECK(v < 6151);
    }
}
