#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fpsketch/errors.hpp"
#include "fpsketch/fp_sketch.hpp"
#include "fpsketch/generators.hpp"
#include "fpsketch/oracle.hpp"

namespace fpsketch {

struct TrialRecord {
    uint64_t trial = 0;
    uint64_t sketch_seed = 0;
    uint64_t instance_seed = 0;
    double fp_true = 0.0;
    double fp_est = 0.0;
    double rel_error = 0.0;
    bool failed = false;
};

struct TrialStats {
    uint64_t trials = 0;
    uint64_t failures = 0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double wall_seconds = 0.0;
    std::vector<TrialRecord> records;

    double failure_rate() const {
        return trials == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(trials);
    }
};

inline uint64_t trial_sketch_seed(uint64_t seed_base, uint64_t trial) { return mix64(seed_base, trial); }
inline uint64_t trial_instance_seed(uint64_t spec_seed, uint64_t trial) {
    return mix64(mix64(spec_seed, 0x7452), trial);
}

namespace detail {

inline void finalize_stats(TrialStats& stats) {
    stats.trials = stats.records.size();
    stats.failures = 0;
    std::vector<double> errs;
    errs.reserve(stats.records.size());
    for (const auto& r : stats.records) {
        if (r.failed) ++stats.failures;
        errs.push_back(r.rel_error);
    }
    if (errs.empty()) return;
    std::sort(errs.begin(), errs.end());
    auto q = [&](double frac) {
        size_t idx = static_cast<size_t>(std::ceil(frac * static_cast<double>(errs.size()))) - 1;
        return errs[std::min(idx, errs.size() - 1)];
    };
    stats.p50 = q(0.50);
    stats.p90 = q(0.90);
    stats.p99 = q(0.99);
}

}  // namespace detail

/// Monte Carlo failure-probability measurement: independent (sketch seed,
/// instance seed) pairs per trial, failures counted against the exact oracle.
/// The seed schedule depends only on (seed_base, trial index), so prefixes of
/// longer runs reproduce shorter ones and parallelism does not change results.
inline TrialStats run_trials(const FpConfig& cfg, const HardInstanceSpec& spec, uint64_t trials,
                             uint32_t parallelism, uint64_t seed_base) {
    if (trials < 1) throw ConfigError("run_trials: need at least one trial");
    parallelism = std::max<uint32_t>(1, parallelism);
    auto t_start = std::chrono::steady_clock::now();

    TrialStats stats;
    stats.records.resize(trials);

    // Each worker keeps one sketch alive: reseed rebuilds the hash families
    // per trial, and retracting the stream returns cells to zero far cheaper
    // than a full clear at these table sizes.
    auto worker = [&](uint32_t w) {
        FpSketch sketch(cfg, trial_sketch_seed(seed_base, w));
        for (uint64_t t = w; t < trials; t += parallelism) {
            uint64_t sseed = trial_sketch_seed(seed_base, t);
            HardInstanceSpec inst = spec;
            inst.seed = trial_instance_seed(spec.seed, t);
            auto updates = generate(inst);
            auto x = oracle::accumulate_stream(updates, cfg.n);
            double fp_true = oracle::exact_fp(x, cfg.p);

            sketch.reseed(sseed);
            sketch.ingest(updates);
            std::optional<double> f2;
            if (cfg.opts.exact_f2) f2 = oracle::exact_f2_res(x, 0);
            FpEstimate est = sketch.estimate(f2);
            sketch.retract(updates);

            TrialRecord rec;
            rec.trial = t;
            rec.sketch_seed = sseed;
            rec.instance_seed = inst.seed;
            rec.fp_true = fp_true;
            rec.fp_est = est.fp;
            rec.rel_error = fp_true > 0.0 ? std::abs(est.fp - fp_true) / fp_true : std::abs(est.fp);
            rec.failed = std::abs(est.fp - fp_true) > cfg.eps * fp_true;
            stats.records[t] = rec;
        }
    };

    if (parallelism == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (uint32_t w = 0; w < parallelism; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }

    detail::finalize_stats(stats);
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return stats;
}

inline void write_trials_csv(const std::string& path, const TrialStats& stats) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open csv file for writing: " + path);
    out << "trial,sketch_seed,instance_seed,fp_true,fp_est,rel_error,failed\n";
    out.precision(17);
    for (const auto& r : stats.records) {
        out << r.trial << ',' << r.sketch_seed << ',' << r.instance_seed << ',' << r.fp_true << ','
            << r.fp_est << ',' << r.rel_error << ',' << (r.failed ? 1 : 0) << '\n';
    }
}

struct LbReport {
    uint64_t n = 0;
    uint32_t r = 0;
    uint64_t t = 0;
    uint64_t samples = 0;
    double advantage = 0.0;            // 2 * (holdout accuracy - 1/2)
    double separation_fraction = 0.0;  // Pr[||z||_p^p >= (1+eps) median ||y||_p^p]
    double e_nt = 0.0;
    double spike_value = 0.0;
    double threshold = 0.0;
};

namespace detail {

/// Random matrix with orthonormal rows: Gaussian entries + Gram-Schmidt.
inline std::vector<std::vector<double>> orthonormal_rows(uint32_t r, uint64_t n, uint64_t seed) {
    std::vector<std::vector<double>> S(r, std::vector<double>(n));
    GaussianStream g(mix64(seed, 0x5eed));
    for (auto& row : S) {
        for (auto& v : row) v = g.next();
    }
    for (uint32_t a = 0; a < r; ++a) {
        for (uint32_t b = 0; b < a; ++b) {
            double dot = 0.0;
            for (uint64_t c = 0; c < n; ++c) dot += S[a][c] * S[b][c];
            for (uint64_t c = 0; c < n; ++c) S[a][c] -= dot * S[b][c];
        }
        double nrm = 0.0;
        for (uint64_t c = 0; c < n; ++c) nrm += S[a][c] * S[a][c];
        nrm = std::sqrt(nrm);
        for (uint64_t c = 0; c < n; ++c) S[a][c] /= nrm;
    }
    return S;
}

inline double sketch_norm(const std::vector<std::vector<double>>& S, const std::vector<double>& x) {
    double acc = 0.0;
    for (const auto& row : S) {
        double dot = 0.0;
        for (size_t c = 0; c < x.size(); ++c) dot += row[c] * x[c];
        acc += dot * dot;
    }
    return std::sqrt(acc);
}

}  // namespace detail

/// Distinguishing experiment for the lower-bound hard pair: alpha = N(0,I_n)
/// against beta = alpha + t planted spikes. A threshold test on ||Sx||_2 is
/// fitted on one half of the samples and scored on the other half.
inline LbReport lb_distinguish(uint64_t n, uint32_t r, double p, double eps, double delta,
                               uint64_t samples, uint64_t seed, double cprime = 4.0) {
    if (r > n) throw ConfigError("lb_distinguish: r must be at most n");
    if (samples < 8) throw ConfigError("lb_distinguish: need at least 8 samples");

    LbReport rep;
    rep.n = n;
    rep.r = r;
    rep.samples = samples;
    rep.t = std::max<uint64_t>(
        1, static_cast<uint64_t>(std::llround(std::log(1.0 / std::sqrt(delta)) / std::log(3.0))));
    rep.e_nt = mc_expected_pnorm(n - rep.t, p, 10000, mix64(seed, 0xe7));

    HardInstanceSpec beta_spec;
    beta_spec.kind = InstanceKind::LbBeta;
    beta_spec.n = n;
    beta_spec.p = p;
    beta_spec.eps = eps;
    beta_spec.lb_cprime = cprime;
    beta_spec.lb_t = rep.t;
    beta_spec.e_nt = rep.e_nt;
    rep.spike_value = lb_beta_spike_value(beta_spec);

    auto S = detail::orthonormal_rows(r, n, seed);

    // scores[s] = (||S y||, ||S z||); pnorms only needed on the eval half.
    std::vector<double> alpha_scores(samples), beta_scores(samples);
    std::vector<double> alpha_pp(samples), beta_pp(samples);
    for (uint64_t s = 0; s < samples; ++s) {
        HardInstanceSpec a;
        a.kind = InstanceKind::LbAlpha;
        a.n = n;
        a.seed = mix64(seed, 2 * s);
        auto y = oracle::accumulate_stream(generate(a), n);

        HardInstanceSpec b = beta_spec;
        b.seed = mix64(seed, 2 * s + 1);
        auto z = oracle::accumulate_stream(generate(b), n);

        alpha_scores[s] = r == 0 ? 0.0 : detail::sketch_norm(S, y);
        beta_scores[s] = r == 0 ? 0.0 : detail::sketch_norm(S, z);
        alpha_pp[s] = oracle::exact_fp(y, p);
        beta_pp[s] = oracle::exact_fp(z, p);
    }

    const uint64_t half = samples / 2;
    // Fit: best threshold on the train half (beta classified as score > thr).
    std::vector<double> candidates;
    candidates.reserve(2 * half);
    for (uint64_t s = 0; s < half; ++s) {
        candidates.push_back(alpha_scores[s]);
        candidates.push_back(beta_scores[s]);
    }
    std::sort(candidates.begin(), candidates.end());
    double best_thr = candidates.front() - 1.0;
    uint64_t best_correct = 0;
    auto count_correct = [&](double thr, uint64_t from, uint64_t to) {
        uint64_t c = 0;
        for (uint64_t s = from; s < to; ++s) {
            if (!(alpha_scores[s] > thr)) ++c;
            if (beta_scores[s] > thr) ++c;
        }
        return c;
    };
    for (size_t ci = 0; ci + 1 <= candidates.size(); ++ci) {
        double thr = ci + 1 < candidates.size() ? 0.5 * (candidates[ci] + candidates[ci + 1])
                                                : candidates[ci] + 1.0;
        uint64_t c = count_correct(thr, 0, half);
        if (c > best_correct) {
            best_correct = c;
            best_thr = thr;
        }
    }
    rep.threshold = best_thr;

    uint64_t eval_correct = count_correct(best_thr, half, samples);
    uint64_t eval_total = 2 * (samples - half);
    double acc = static_cast<double>(eval_correct) / static_cast<double>(eval_total);
    rep.advantage = 2.0 * (acc - 0.5);

    // Separation premise on the eval half.
    std::vector<double> med(alpha_pp.begin() + half, alpha_pp.end());
    std::sort(med.begin(), med.end());
    double median_alpha = med[med.size() / 2];
    uint64_t sep = 0;
    for (uint64_t s = half; s < samples; ++s) {
        if (beta_pp[s] >= (1.0 + eps) * median_alpha) ++sep;
    }
    rep.separation_fraction = static_cast<double>(sep) / static_cast<double>(samples - half);
    return rep;
}

}  // namespace fpsketch
