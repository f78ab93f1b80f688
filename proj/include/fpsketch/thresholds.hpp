#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "fpsketch/config.hpp"
#include "fpsketch/errors.hpp"

namespace fpsketch {

/// Frequency thresholds. T and Q cover levels 0..L-1; level L behaves as
/// T_L = Q_L = 0+ (any positive estimate qualifies). U covers shelves with
/// U[0] = T0 and U[J+1] = +inf; when shelves are disabled U[1] = +inf so the
/// level-0 group extends to [T0, inf).
struct Thresholds {
    double f2hat = 0.0;
    double B = 0.0;
    std::vector<double> T;
    std::vector<double> Q;
    std::vector<double> U;

    double upper(uint32_t l) const {  // T_{l-1}, with T_{-1} = U[1]
        return l == 0 ? U[1] : T[l - 1];
    }
};

inline Thresholds derive_thresholds(const FpConfig& cfg, double f2hat) {
    if (!(f2hat > 0.0)) throw ConfigError("derive_thresholds: F2 estimate must be positive");
    Thresholds thr;
    thr.f2hat = f2hat;
    thr.B = cfg.B;
    thr.T.resize(cfg.L);
    thr.Q.resize(cfg.L);
    const double t0 = std::sqrt(f2hat / cfg.B);
    const double two_alpha = 2.0 * cfg.alpha;
    for (uint32_t l = 0; l < cfg.L; ++l) {
        thr.T[l] = std::pow(two_alpha, -0.5 * l) * t0;
        thr.Q[l] = thr.T[l] * (1.0 - cfg.eps_bar);
    }
    const double inf = std::numeric_limits<double>::infinity();
    if (cfg.shelves_enabled) {
        thr.U.resize(cfg.shelf.J + 2);
        thr.U[0] = t0;
        for (uint32_t j = 1; j <= cfg.shelf.J; ++j) {
            const double e_j = cfg.eps_bar * cfg.eps_bar * static_cast<double>(cfg.shelf.H[j]);
            thr.U[j] = std::sqrt(f2hat / e_j);
        }
        thr.U[cfg.shelf.J + 1] = inf;
    } else {
        thr.U = {t0, inf};
    }
    return thr;
}

}  // namespace fpsketch
