#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "fpsketch/avg_est.hpp"
#include "fpsketch/count_sketch.hpp"
#include "fpsketch/ghss.hpp"

namespace fpsketch {

/// One shelf: an HH CountSketch of w_j rows and an AvgEst of 2w_j rows over
/// bucket_mult * H_j buckets, fed by the whole (unsampled) stream. Shelf 0 is
/// not materialized here; it aliases GHSS level 0.
struct ShelfLevel {
    uint32_t j = 0;
    uint64_t h_j = 0;
    uint64_t w_j = 0;
    CsStructure hh;
    AeStructure ae;

    ShelfLevel() = default;
    ShelfLevel(uint32_t j_, uint64_t h, uint64_t w, uint64_t buckets, uint64_t domain, uint64_t q,
               uint64_t seed, uint32_t k, bool prf)
        : j(j_),
          h_j(h),
          w_j(w),
          hh(static_cast<uint32_t>(w), buckets, domain, seed, k, prf, SeedRole::ShelfHHBucket,
             SeedRole::ShelfHHSign, j_),
          ae(static_cast<uint32_t>(2 * w), buckets, domain, q, seed, k, prf, SeedRole::ShelfAEBucket,
             SeedRole::ShelfAERoot, j_) {}
};

/// Shelf classification alone (the shelf branch of discovery): highest shelf
/// j in [1, J] with (1-eb)U_j <= |x_hat_ij| <= (1+eb)U_{j+1}, or none.
inline std::optional<uint32_t> classify_shelf(const std::vector<double>& shelf_ests,
                                              const std::vector<double>& U, double eps_bar) {
    const uint32_t J = static_cast<uint32_t>(shelf_ests.size());
    for (uint32_t j = J; j >= 1; --j) {
        double a = std::abs(shelf_ests[j - 1]);
        if (a >= (1.0 - eps_bar) * U[j] && a <= (1.0 + eps_bar) * U[j + 1]) return j;
    }
    return std::nullopt;
}

/// F_p-hat^shelf: plain sum of X_i^p over shelf assignments (scale 1).
inline double shelf_contribution(const std::vector<Assignment>& assignments, double p) {
    double acc = 0.0;
    for (const auto& a : assignments) {
        if (a.kind == Assignment::Kind::Shelf) acc += std::pow(a.estimate, p);
    }
    return acc;
}

}  // namespace fpsketch
