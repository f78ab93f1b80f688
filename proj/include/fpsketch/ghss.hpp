#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpsketch/avg_est.hpp"
#include "fpsketch/count_sketch.hpp"
#include "fpsketch/thresholds.hpp"

namespace fpsketch {

/// One GHSS level: an HH CountSketch of s rows and an AvgEst of 2s rows,
/// both over bucket_mult * C_l buckets, fed by the level-l subsampled stream.
struct GhssLevel {
    uint32_t level = 0;
    uint64_t c_l = 0;
    CsStructure hh;
    AeStructure ae;

    GhssLevel() = default;
    GhssLevel(uint32_t l, uint64_t c_l_, uint32_t s, uint64_t buckets, uint64_t domain, uint64_t q,
              uint64_t seed, uint32_t k, bool prf)
        : level(l),
          c_l(c_l_),
          hh(s, buckets, domain, seed, k, prf, SeedRole::GhssHHBucket, SeedRole::GhssHHSign, l),
          ae(2 * s, buckets, domain, q, seed, k, prf, SeedRole::GhssAEBucket, SeedRole::GhssAERoot, l) {}
};

enum class DropReason : uint8_t { None, NoCollision, OutOfBand, NotDiscovered, CoinTails };

inline const char* drop_reason_name(DropReason r) {
    switch (r) {
        case DropReason::None: return "none";
        case DropReason::NoCollision: return "no-collision";
        case DropReason::OutOfBand: return "out-of-band";
        case DropReason::NotDiscovered: return "not-discovered";
        case DropReason::CoinTails: return "coin-tails";
    }
    return "?";
}

/// Per-item classification outcome of the estimation pass.
struct Assignment {
    enum class Kind : uint8_t { GhssLevel, Shelf, Dropped };
    uint64_t item = 0;
    Kind kind = Kind::Dropped;
    uint32_t index = 0;      // sampled group level l, or shelf j
    double estimate = 0.0;   // X_i (>= 0), or |x_hat_i| at level L
    double scale = 1.0;      // 2^group for GHSS, 1 for shelves
    DropReason reason = DropReason::None;
    double imag_diag = 0.0;  // imaginary part of the averaged estimate
};

struct DiscoveryOutcome {
    enum class Kind : uint8_t { Shelf, Level, None };
    Kind kind = Kind::None;
    uint32_t index = 0;
    double hh_estimate = 0.0;  // signed estimate from the discovering structure
};

/// Discovery: the highest shelf whose band contains |x_hat|, else the
/// smallest subsampled level with T_l(1-eb) < |x_hat_il| <= T_{l-1}(1+eb).
/// Level estimates arrive as (level, estimate) pairs for the levels where the
/// item is subsampled; level L entries use the recovered value.
inline DiscoveryOutcome discover(const std::vector<double>& shelf_ests,
                                 const std::vector<std::pair<uint32_t, double>>& level_ests,
                                 const Thresholds& thr, double eps_bar, uint32_t L) {
    DiscoveryOutcome out;
    // Shelves are indexed 1..J in thr.U (U[J+1] = inf); shelf_ests[j-1] is
    // the estimate from shelf j's HH structure.
    const uint32_t J = shelf_ests.empty() ? 0 : static_cast<uint32_t>(shelf_ests.size());
    for (uint32_t j = J; j >= 1; --j) {
        double a = std::abs(shelf_ests[j - 1]);
        if (a >= (1.0 - eps_bar) * thr.U[j] && a <= (1.0 + eps_bar) * thr.U[j + 1]) {
            out.kind = DiscoveryOutcome::Kind::Shelf;
            out.index = j;
            out.hh_estimate = shelf_ests[j - 1];
            return out;
        }
    }
    for (const auto& [l, est] : level_ests) {
        double a = std::abs(est);
        if (l == L) {
            if (a > 0.0) {
                out.kind = DiscoveryOutcome::Kind::Level;
                out.index = L;
                out.hh_estimate = est;
                return out;
            }
            continue;
        }
        const double lower = thr.Q[l];
        const double upper = (1.0 + eps_bar) * thr.upper(l);
        if (a > lower && a <= upper) {
            out.kind = DiscoveryOutcome::Kind::Level;
            out.index = l;
            out.hh_estimate = est;
            return out;
        }
    }
    return out;
}

struct SampleDecision {
    bool sampled = false;
    uint32_t group = 0;  // sampled group index (l_d or l_d + 1)
};

/// Level sampling: |x_hat| >= T_l places the item in G-bar_l; the margin
/// (Q_l, T_l) flips an unbiased coin for G-bar_{l+1}, tails drops the item.
inline SampleDecision sample_into_group(uint32_t l_d, double hh_estimate, const Thresholds& thr,
                                        uint64_t coin_seed, uint64_t item) {
    SampleDecision d;
    const double a = std::abs(hh_estimate);
    if (a >= thr.T[l_d]) {
        d.sampled = true;
        d.group = l_d;
    } else if (coin(coin_seed, item) == 1) {
        d.sampled = true;
        d.group = l_d + 1;
    }
    return d;
}

/// Sum of scaled p-th powers over GHSS assignments plus the exactly-recovered
/// level-L items (scale 2^L).
inline double ghss_contribution(const std::vector<Assignment>& assignments,
                                const std::vector<std::pair<uint64_t, double>>& recovered_at_L, double p,
                                uint32_t L) {
    double acc = 0.0;
    for (const auto& a : assignments) {
        if (a.kind == Assignment::Kind::GhssLevel && a.index < L) {
            acc += a.scale * std::pow(a.estimate, p);
        }
    }
    const double scale_L = std::ldexp(1.0, static_cast<int>(L));
    for (const auto& [i, v] : recovered_at_L) {
        (void)i;
        acc += scale_L * std::pow(std::abs(v), p);
    }
    return acc;
}

}  // namespace fpsketch
