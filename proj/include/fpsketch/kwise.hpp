#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "fpsketch/errors.hpp"
#include "fpsketch/prf.hpp"

namespace fpsketch {

inline uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline uint64_t powmod_u64(uint64_t base, uint64_t exp, uint64_t m) {
    uint64_t acc = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) acc = mulmod_u64(acc, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return acc;
}

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
inline bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

inline uint64_t next_prime_above(uint64_t n) {
    uint64_t c = n + 1;
    if (c <= 2) return 2;
    if ((c & 1) == 0) ++c;
    while (!is_prime_u64(c)) c += 2;
    return c;
}

/// k-wise independent hash family: degree-(k-1) polynomial over a prime
/// field, reduced to [0, range). The prime exceeds max(domain, range, 2^31)
/// so the reduction bias is negligible at the ranges used here.
///
/// `prf` mode replaces the polynomial with a full-randomness PRF keyed by
/// the seed; outputs are still deterministic per (seed, i).
class KWiseHash {
public:
    KWiseHash() = default;

    KWiseHash(uint64_t seed, uint32_t k, uint64_t domain, uint64_t range, bool prf = false)
        : seed_(seed), k_(k), domain_(domain), range_(range), prf_(prf) {
        if (k < 1) throw ConfigError("KWiseHash: independence degree k must be >= 1");
        if (range < 1) throw ConfigError("KWiseHash: range must be >= 1");
        if (domain < 1) throw ConfigError("KWiseHash: domain must be >= 1");
        if (!prf_) {
            modulus_ = next_prime_above(std::max({domain, range, uint64_t(1) << 31}) );
            coef_.resize(k_);
            // Rejection-sampled field elements from a counter-mode PRF.
            uint64_t limit = modulus_ * (UINT64_MAX / modulus_);
            uint64_t ctr = 0;
            for (uint32_t j = 0; j < k_; ++j) {
                uint64_t w;
                do {
                    w = prf64(seed_, ctr++);
                } while (w >= limit);
                coef_[j] = w % modulus_;
            }
        }
    }

    // Test constructor: fixed coefficients (coef[j] multiplies i^j).
    static KWiseHash with_coefficients(std::vector<uint64_t> coef, uint64_t modulus, uint64_t domain,
                                       uint64_t range) {
        if (coef.empty()) throw ConfigError("KWiseHash: empty coefficient vector");
        KWiseHash h;
        h.seed_ = 0;
        h.k_ = static_cast<uint32_t>(coef.size());
        h.domain_ = domain;
        h.range_ = range;
        h.modulus_ = modulus;
        h.coef_ = std::move(coef);
        h.prf_ = false;
        return h;
    }

    uint64_t eval(uint64_t i) const {
        if (i >= domain_) throw ConfigError("KWiseHash: index out of domain");
        if (prf_) return reduce_range(prf64(seed_ ^ 0x5851f42d4c957f2dULL, i), range_);
        // Horner evaluation of sum_j coef[j] * i^j mod modulus.
        uint64_t x = i % modulus_;
        uint64_t acc = 0;
        for (uint32_t j = k_; j-- > 0;) {
            acc = mulmod_u64(acc, x, modulus_);
            acc += coef_[j];
            if (acc >= modulus_) acc -= modulus_;
        }
        return acc % range_;
    }

    uint64_t seed() const { return seed_; }
    uint32_t k() const { return k_; }
    uint64_t domain() const { return domain_; }
    uint64_t range() const { return range_; }
    uint64_t modulus() const { return modulus_; }
    bool prf_mode() const { return prf_; }

private:
    uint64_t seed_ = 0;
    uint32_t k_ = 0;
    uint64_t domain_ = 1;
    uint64_t range_ = 1;
    uint64_t modulus_ = 0;
    bool prf_ = false;
    std::vector<uint64_t> coef_;
};

/// Random family of q-th roots of unity: item i maps to exp(2*pi*I*u/q)
/// where u = index_hash(i). The table of q roots is precomputed.
class RootsFamily {
public:
    RootsFamily() = default;

    RootsFamily(uint64_t seed, uint32_t k, uint64_t domain, uint64_t q, bool prf = false)
        : q_(q), index_hash_(seed, k, domain, q, prf) {
        if (q < 2) throw ConfigError("RootsFamily: q must be >= 2");
        build_table();
    }

    static RootsFamily with_index_hash(KWiseHash h) {
        RootsFamily f;
        f.q_ = h.range();
        f.index_hash_ = std::move(h);
        f.build_table();
        return f;
    }

    std::complex<double> root(uint64_t i) const { return table_[index_hash_.eval(i)]; }
    std::complex<double> conj_root(uint64_t i) const { return std::conj(root(i)); }

    uint64_t q() const { return q_; }
    const KWiseHash& index_hash() const { return index_hash_; }
    const std::vector<std::complex<double>>& table() const { return table_; }

private:
    void build_table() {
        table_.resize(q_);
        for (uint64_t u = 0; u < q_; ++u) {
            double theta = 2.0 * std::numbers::pi * static_cast<double>(u) / static_cast<double>(q_);
            table_[u] = {std::cos(theta), std::sin(theta)};
        }
    }

    uint64_t q_ = 0;
    KWiseHash index_hash_;
    std::vector<std::complex<double>> table_;
};

/// Hierarchical subsampling bits: i belongs to level l iff g_1(i)=...=g_l(i)=1.
/// Level 0 always holds the whole stream.
class SubsampleFamily {
public:
    SubsampleFamily() = default;

    SubsampleFamily(uint64_t seed, uint32_t k, uint64_t domain, uint32_t levels, bool prf = false) {
        g_.reserve(levels);
        for (uint32_t l = 0; l < levels; ++l) {
            g_.emplace_back(derive_seed(seed, SeedRole::Subsample, l), k, domain, 2, prf);
        }
    }

    uint32_t levels() const { return static_cast<uint32_t>(g_.size()); }

    bool member(uint64_t i, uint32_t l) const {
        if (l > levels()) throw ConfigError("SubsampleFamily: level beyond L");
        for (uint32_t j = 0; j < l; ++j) {
            if (g_[j].eval(i) != 1) return false;
        }
        return true;
    }

    // Deepest level containing i (0..levels()).
    uint32_t deepest(uint64_t i) const {
        uint32_t l = 0;
        while (l < levels() && g_[l].eval(i) == 1) ++l;
        return l;
    }

private:
    std::vector<KWiseHash> g_;
};

/// Deterministic unbiased coin per (seed, item).
inline int coin(uint64_t seed, uint64_t i) {
    return static_cast<int>(prf64(seed, i) >> 63);
}

}  // namespace fpsketch
