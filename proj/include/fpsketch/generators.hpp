#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fpsketch/errors.hpp"
#include "fpsketch/prf.hpp"

namespace fpsketch {

/// Deterministic standard-normal stream (Box-Muller over the PRF), so
/// generated instances are reproducible independent of the standard library.
class GaussianStream {
public:
    explicit GaussianStream(uint64_t seed) : seed_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = to_unit(prf64(seed_, ctr_++));
        double u2 = to_unit(prf64(seed_, ctr_++));
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

private:
    static double to_unit(uint64_t w) {
        return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;  // (0,1)
    }
    uint64_t seed_;
    uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline double prf_unit(uint64_t seed, uint64_t ctr) {
    return (static_cast<double>(prf64(seed, ctr) >> 11) + 0.5) * 0x1.0p-53;
}

/// First t entries of a seeded permutation of [n].
inline std::vector<uint64_t> random_subset(uint64_t n, uint64_t t, uint64_t seed) {
    if (t > n) throw ConfigError("random_subset: t exceeds n");
    std::vector<uint64_t> idx(n);
    std::iota(idx.begin(), idx.end(), uint64_t{0});
    for (uint64_t i = 0; i < t; ++i) {
        uint64_t j = i + reduce_range(prf64(seed, i), n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(t);
    return idx;
}

enum class InstanceKind { Zipf, Spike, Largeish, LbAlpha, LbBeta };

inline const char* instance_kind_name(InstanceKind k) {
    switch (k) {
        case InstanceKind::Zipf: return "zipf";
        case InstanceKind::Spike: return "spike";
        case InstanceKind::Largeish: return "largeish";
        case InstanceKind::LbAlpha: return "lb_alpha";
        case InstanceKind::LbBeta: return "lb_beta";
    }
    return "?";
}

struct HardInstanceSpec {
    InstanceKind kind = InstanceKind::Zipf;
    uint64_t n = 0;
    uint64_t seed = 0;

    double zipf_s = 1.1;

    uint64_t spike_count = 1;
    double spike_magnitude = 1.0;
    double noise_sigma = 0.0;

    uint64_t largeish_t = 8;
    double largeish_scale = 1.0;

    double p = 3.0;           // largeish / lb_beta magnitudes depend on p
    double eps = 0.5;         // lb_beta spike scale
    double lb_cprime = 4.0;   // the paper leaves C' > 0 unspecified
    uint64_t lb_t = 2;
    double e_nt = 0.0;        // E[||N(0,I_{n-t})||_p]; 0 = compute on demand
};

/// Monte Carlo estimate of E[||x||_p] for x ~ N(0, I_n).
inline double mc_expected_pnorm(uint64_t n, double p, uint64_t draws = 10000, uint64_t seed = 0x9e11) {
    double acc = 0.0;
    for (uint64_t d = 0; d < draws; ++d) {
        GaussianStream g(mix64(seed, d));
        double s = 0.0;
        for (uint64_t i = 0; i < n; ++i) s += std::pow(std::abs(g.next()), p);
        acc += std::pow(s, 1.0 / p);
    }
    return acc / static_cast<double>(draws);
}

inline double lb_beta_spike_value(const HardInstanceSpec& spec) {
    double e_nt = spec.e_nt;
    if (e_nt <= 0.0) e_nt = mc_expected_pnorm(spec.n - spec.lb_t, spec.p);
    return spec.lb_cprime * std::pow(spec.eps, 1.0 / spec.p) * e_nt /
           std::pow(static_cast<double>(spec.lb_t), 1.0 / spec.p);
}

/// One update per emitted coordinate, deterministic for (spec, seed).
inline std::vector<std::pair<uint64_t, double>> generate(const HardInstanceSpec& spec) {
    if (spec.n < 1) throw ConfigError("generate: n must be positive");
    std::vector<std::pair<uint64_t, double>> updates;
    switch (spec.kind) {
        case InstanceKind::Zipf: {
            if (!(spec.zipf_s > 0.0)) throw ConfigError("generate: zipf exponent must be positive");
            auto perm = random_subset(spec.n, spec.n, mix64(spec.seed, 0xa1));
            updates.reserve(spec.n);
            for (uint64_t rank = 0; rank < spec.n; ++rank) {
                double v = std::pow(static_cast<double>(rank + 1), -spec.zipf_s);
                updates.emplace_back(perm[rank], v);
            }
            break;
        }
        case InstanceKind::Spike: {
            if (spec.spike_count > spec.n) throw ConfigError("generate: spike count exceeds n");
            auto pos = random_subset(spec.n, spec.spike_count, mix64(spec.seed, 0xa2));
            std::vector<bool> is_spike(spec.n, false);
            for (uint64_t i : pos) is_spike[i] = true;
            uint64_t sctr = 0;
            for (uint64_t i : pos) {
                double sign = (prf64(mix64(spec.seed, 0xa3), sctr++) >> 63) ? 1.0 : -1.0;
                updates.emplace_back(i, sign * spec.spike_magnitude);
            }
            if (spec.noise_sigma > 0.0) {
                GaussianStream g(mix64(spec.seed, 0xa4));
                for (uint64_t i = 0; i < spec.n; ++i) {
                    double z = g.next();
                    if (!is_spike[i]) updates.emplace_back(i, spec.noise_sigma * z);
                }
            }
            break;
        }
        case InstanceKind::Largeish: {
            if (spec.largeish_t < 1 || spec.largeish_t > spec.n) {
                throw ConfigError("generate: largeish spike count out of range");
            }
            double mag = spec.largeish_scale *
                         std::pow(static_cast<double>(spec.n) / static_cast<double>(spec.largeish_t),
                                  1.0 / spec.p);
            HardInstanceSpec inner = spec;
            inner.kind = InstanceKind::Spike;
            inner.spike_count = spec.largeish_t;
            inner.spike_magnitude = mag;
            inner.noise_sigma = 1.0;
            return generate(inner);
        }
        case InstanceKind::LbAlpha: {
            GaussianStream g(mix64(spec.seed, 0xa5));
            updates.reserve(spec.n);
            for (uint64_t i = 0; i < spec.n; ++i) updates.emplace_back(i, g.next());
            break;
        }
        case InstanceKind::LbBeta: {
            if (spec.lb_t > spec.n) throw ConfigError("generate: lb_beta t exceeds n");
            GaussianStream g(mix64(spec.seed, 0xa5));  // same base Gaussian as lb_alpha
            updates.reserve(spec.n + spec.lb_t);
            for (uint64_t i = 0; i < spec.n; ++i) updates.emplace_back(i, g.next());
            double v = lb_beta_spike_value(spec);
            for (uint64_t i : random_subset(spec.n, spec.lb_t, mix64(spec.seed, 0xa6))) {
                updates.emplace_back(i, v);
            }
            break;
        }
    }
    return updates;
}

}  // namespace fpsketch
