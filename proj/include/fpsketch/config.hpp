#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fpsketch/errors.hpp"

namespace fpsketch {

enum class ShelvesMode { Auto, On, Off };

/// Tunable multipliers and mode flags. The paper hides every constant inside
/// Theta(.); these expose them (spec'd defaults = 1).
struct ConfigOverrides {
    double c_C = 1.0;
    double c_s = 1.0;
    double c_H = 1.0;
    double c_w = 1.0;
    double c_F2 = 1.0;
    double nu = 0.01;
    uint32_t k_max = 64;
    uint32_t bucket_mult = 16;
    double kappa = 0.05;      // F2 upper-bound slack
    double c_regime = 3.0;    // shelves auto-disable when delta >= n^-c_regime
    ShelvesMode shelves = ShelvesMode::Auto;
    bool prf_hash = false;
    bool exact_f2 = false;
};

struct ShelfDims {
    uint32_t J = 0;           // highest shelf index; shelf 0 aliases GHSS level 0
    double a = 0.0;           // width growth ratio
    double b = 0.0;           // height decay ratio
    std::vector<uint64_t> H;  // H[j], j = 0..J (H[0] = C0)
    std::vector<uint64_t> w;  // w[j], j = 0..J (w[0] = s)
};

struct FpConfig {
    // Problem parameters.
    uint64_t n = 0;
    double p = 0.0;
    double eps = 0.0;
    double delta = 0.0;

    // Constants fixed by the analysis.
    double nu = 0.01;
    double eps_bar = 0.0;  // 1/(54p)
    double alpha = 0.0;    // 1 - (1-2/p)nu

    // GHSS geometry.
    uint64_t C = 0;  // C0
    double B = 0.0;  // eps_bar^2 * C
    uint32_t L = 0;
    std::vector<uint64_t> C_l;  // heights for levels 0..L-1
    uint32_t s = 0;             // HH rows per level; AvgEst uses 2s
    uint64_t q = 0;             // roots-of-unity order
    uint32_t k = 0;             // hash independence degree

    // Level-L exact recovery.
    uint64_t recovery_buckets = 0;
    uint32_t recovery_rows = 0;
    uint64_t recovery_capacity = 0;  // 2 C_L

    // Shelf structure.
    uint64_t H0 = 0, HJ = 0;
    uint64_t w0 = 0, wJ = 0;
    ShelfDims shelf;
    bool shelves_enabled = false;

    // F2 estimator bank.
    uint32_t f2_rows = 0;
    uint64_t f2_buckets = 0;
    double kappa = 0.05;

    ConfigOverrides opts;

    bool operator==(const FpConfig& o) const {
        return n == o.n && p == o.p && eps == o.eps && delta == o.delta && C == o.C && L == o.L &&
               s == o.s && q == o.q && k == o.k && shelves_enabled == o.shelves_enabled &&
               shelf.J == o.shelf.J && f2_rows == o.f2_rows && f2_buckets == o.f2_buckets &&
               opts.bucket_mult == o.opts.bucket_mult && opts.prf_hash == o.opts.prf_hash;
    }
};

namespace detail {

inline double log2_inv(double delta) { return std::log2(1.0 / delta); }

inline uint64_t ceil_u64(double v) {
    if (v < 1.0) return 1;
    return static_cast<uint64_t>(std::ceil(v - 1e-12));
}

}  // namespace detail

/// Shelf dimension derivation. Multi-shelf case uses b = 1/2, a = 2e and
/// J = ceil(ln(HJ*wJ/(H0*w0))); when that collapses (including HJ >= H0),
/// there are exactly two shelves and shelf 1 takes (HJ, wJ) directly.
inline ShelfDims shelf_params(uint64_t H0, uint64_t HJ, uint64_t w0, uint64_t wJ) {
    ShelfDims d;
    d.H.push_back(H0);
    d.w.push_back(w0);
    double L0 = std::log(static_cast<double>(HJ) * static_cast<double>(wJ) /
                         (static_cast<double>(H0) * static_cast<double>(w0)));
    if (HJ >= H0 || L0 <= 1.0) {
        d.J = 1;
        d.H.push_back(HJ);
        d.w.push_back(wJ);
        d.a = static_cast<double>(wJ) / static_cast<double>(w0);
        d.b = static_cast<double>(HJ) / static_cast<double>(H0);
        return d;
    }
    d.J = static_cast<uint32_t>(std::max<int64_t>(1, static_cast<int64_t>(std::ceil(L0 - 1e-12))));
    d.b = 0.5;
    d.a = 2.0 * std::exp(1.0);
    for (uint32_t j = 1; j <= d.J; ++j) {
        d.H.push_back(std::max<uint64_t>(16, detail::ceil_u64(static_cast<double>(H0) * std::pow(d.b, j))));
        d.w.push_back(detail::ceil_u64(static_cast<double>(w0) * std::pow(d.a, j)));
    }
    return d;
}

inline FpConfig config_derive(uint64_t n, double p, double eps, double delta,
                              const ConfigOverrides& opts = {}) {
    if (p <= 2.0) {
        throw ConfigError("config_derive: p <= 2 is out of scope (this sketch targets the p > 2 regime; "
                          "use a dedicated F2/Fp<=2 estimator instead)");
    }
    if (n < 4) throw ConfigError("config_derive: n must be >= 4");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("config_derive: eps must lie in (0,1)");
    if (!(delta > 0.0 && delta <= 7.0 / 8.0)) throw ConfigError("config_derive: delta must lie in (0, 7/8]");

    FpConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.eps = eps;
    cfg.delta = delta;
    cfg.opts = opts;
    cfg.nu = opts.nu;
    cfg.kappa = opts.kappa;
    cfg.eps_bar = 1.0 / (54.0 * p);
    cfg.alpha = 1.0 - (1.0 - 2.0 / p) * cfg.nu;

    const double log2n = std::log2(static_cast<double>(n));
    const double logd = detail::log2_inv(delta);
    const double n_pow = std::pow(static_cast<double>(n), 1.0 - 2.0 / p);

    const double c_base =
        n_pow * (std::pow(eps, -2.0) * logd / log2n + std::pow(eps, -4.0 / p) * std::pow(logd, 2.0 / p));
    cfg.C = detail::ceil_u64(opts.c_C * c_base);
    cfg.B = cfg.eps_bar * cfg.eps_bar * static_cast<double>(cfg.C);

    const double two_alpha = 2.0 * cfg.alpha;
    double l_real = std::log(static_cast<double>(n) / static_cast<double>(cfg.C)) / std::log(two_alpha);
    cfg.L = static_cast<uint32_t>(std::max<int64_t>(1, static_cast<int64_t>(std::ceil(l_real - 1e-12))));

    cfg.C_l.resize(cfg.L);
    for (uint32_t l = 0; l < cfg.L; ++l) {
        cfg.C_l[l] = std::max<uint64_t>(
            16, detail::ceil_u64(static_cast<double>(cfg.C) * std::pow(cfg.alpha, l)));
    }

    const uint32_t log2n_c = static_cast<uint32_t>(std::ceil(log2n - 1e-9));
    const uint32_t logd_c = static_cast<uint32_t>(std::ceil(logd - 1e-9));
    cfg.s = std::max<uint32_t>(3, static_cast<uint32_t>(std::ceil(opts.c_s * 9.0 * log2n_c - 1e-9)));
    cfg.q = std::max<uint64_t>(4, 2ULL * (logd_c + log2n_c));
    cfg.k = std::max<uint32_t>(2, std::min<uint32_t>(opts.k_max, logd_c + log2n_c + 1));

    const uint64_t c_last = std::max<uint64_t>(
        16, detail::ceil_u64(static_cast<double>(cfg.C) * std::pow(cfg.alpha, cfg.L)));
    cfg.recovery_buckets = 8 * c_last;
    cfg.recovery_rows = std::max<uint32_t>(2, log2n_c);
    cfg.recovery_capacity = 2 * c_last;

    cfg.H0 = detail::ceil_u64(opts.c_H * n_pow * std::pow(eps, -4.0 / p) * std::pow(logd, 2.0 / p));
    cfg.HJ = detail::ceil_u64(opts.c_H * n_pow * std::pow(eps, -2.0));
    cfg.w0 = cfg.s;
    cfg.wJ = std::max<uint64_t>(1, detail::ceil_u64(opts.c_w * logd_c));
    cfg.shelf = shelf_params(cfg.H0, cfg.HJ, cfg.w0, cfg.wJ);

    switch (opts.shelves) {
        case ShelvesMode::On:
            cfg.shelves_enabled = true;
            break;
        case ShelvesMode::Off:
            cfg.shelves_enabled = false;
            break;
        case ShelvesMode::Auto:
            // Shelves matter only for delta = n^-omega(1).
            cfg.shelves_enabled = delta < std::pow(static_cast<double>(n), -opts.c_regime);
            break;
    }

    cfg.f2_rows = std::max<uint32_t>(9, 2 * logd_c + 1);
    cfg.f2_buckets = std::max<uint64_t>(64, detail::ceil_u64(4096.0 * opts.c_F2));
    return cfg;
}

struct MeasurementReport {
    uint64_t cells_ghss = 0;
    uint64_t cells_shelf = 0;
    uint64_t cells_f2 = 0;
    uint64_t total = 0;
    uint64_t baseline_total = 0;
};

/// Exact cell counts of the derived geometry, against the median-amplified
/// baseline (ceil(log2(1/delta)) copies of a constant-confidence estimator
/// with the same multipliers and no shelf).
inline MeasurementReport measurement_report(const FpConfig& cfg) {
    MeasurementReport rep;
    const uint64_t bm = cfg.opts.bucket_mult;
    for (uint32_t l = 0; l < cfg.L; ++l) {
        rep.cells_ghss += bm * cfg.C_l[l] * (cfg.s + 2ULL * cfg.s);
    }
    // Recovery keeps three linear measurements per cell (value/key/check sums).
    rep.cells_ghss += 3ULL * cfg.recovery_buckets * cfg.recovery_rows;
    if (cfg.shelves_enabled) {
        for (uint32_t j = 1; j <= cfg.shelf.J; ++j) {
            rep.cells_shelf += bm * cfg.shelf.H[j] * (cfg.shelf.w[j] + 2ULL * cfg.shelf.w[j]);
        }
    }
    rep.cells_f2 = static_cast<uint64_t>(cfg.f2_rows) * cfg.f2_buckets;
    rep.total = rep.cells_ghss + rep.cells_shelf + rep.cells_f2;

    ConfigOverrides base_opts = cfg.opts;
    base_opts.shelves = ShelvesMode::Off;
    FpConfig base = config_derive(cfg.n, cfg.p, cfg.eps, 0.25, base_opts);
    uint64_t base_cells = 0;
    for (uint32_t l = 0; l < base.L; ++l) base_cells += bm * base.C_l[l] * (base.s + 2ULL * base.s);
    base_cells += 3ULL * base.recovery_buckets * base.recovery_rows;
    base_cells += static_cast<uint64_t>(base.f2_rows) * base.f2_buckets;
    const uint64_t reps = static_cast<uint64_t>(std::ceil(detail::log2_inv(cfg.delta) - 1e-9));
    rep.baseline_total = std::max<uint64_t>(1, reps) * base_cells;
    return rep;
}

}  // namespace fpsketch
