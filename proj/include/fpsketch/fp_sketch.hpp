#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fpsketch/avg_est.hpp"
#include "fpsketch/config.hpp"
#include "fpsketch/count_sketch.hpp"
#include "fpsketch/errors.hpp"
#include "fpsketch/f2_sketch.hpp"
#include "fpsketch/ghss.hpp"
#include "fpsketch/kwise.hpp"
#include "fpsketch/serialize.hpp"
#include "fpsketch/shelf.hpp"
#include "fpsketch/sparse_recovery.hpp"
#include "fpsketch/thresholds.hpp"

namespace fpsketch {

struct FpEstimate {
    double fp = 0.0;
    double fp_shelf = 0.0;
    double fp_ghss = 0.0;
    double f2hat = 0.0;
    Thresholds thresholds;
    std::vector<Assignment> assignments;  // discovered items and non-trivial drops
    uint64_t recovered_count = 0;
    uint64_t discovered_shelf = 0;
    uint64_t discovered_level = 0;
    uint64_t discovered_last_level = 0;
    uint64_t dropped_nocollision = 0;
    uint64_t dropped_band = 0;
    uint64_t dropped_coin = 0;
    uint64_t not_discovered = 0;
};

/// The full linear sketch: F2 bank + GHSS levels + level-L recovery + shelves.
/// Update fan-out is a pure function of (config, seed, item), so replaying a
/// stream reproduces identical cells and merge equals re-sketching.
class FpSketch {
public:
    FpSketch(FpConfig cfg, uint64_t seed) : cfg_(std::move(cfg)), seed_(seed) {
        const bool prf = cfg_.opts.prf_hash;
        subsample_ = SubsampleFamily(seed_, cfg_.k, cfg_.n, cfg_.L, prf);
        f2_ = F2Bank(cfg_.f2_rows, cfg_.f2_buckets, cfg_.n, seed_, cfg_.k, cfg_.kappa, prf);
        levels_.reserve(cfg_.L);
        for (uint32_t l = 0; l < cfg_.L; ++l) {
            levels_.emplace_back(l, cfg_.C_l[l], cfg_.s, cfg_.opts.bucket_mult * cfg_.C_l[l], cfg_.n,
                                 cfg_.q, seed_, cfg_.k, prf);
        }
        last_ = SparseRecovery(cfg_.recovery_rows, cfg_.recovery_buckets, cfg_.recovery_capacity, cfg_.n,
                               seed_, cfg_.k, prf);
        if (cfg_.shelves_enabled) {
            shelves_.reserve(cfg_.shelf.J);
            for (uint32_t j = 1; j <= cfg_.shelf.J; ++j) {
                shelves_.emplace_back(j, cfg_.shelf.H[j], cfg_.shelf.w[j],
                                      cfg_.opts.bucket_mult * cfg_.shelf.H[j], cfg_.n, cfg_.q, seed_,
                                      cfg_.k, prf);
            }
        }
        coin_seed_ = derive_seed(seed_, SeedRole::Coin);
    }

    const FpConfig& config() const { return cfg_; }
    uint64_t seed() const { return seed_; }
    uint64_t update_count() const { return update_count_; }

    // Shelf 0 is GHSS level 0 (same tables, not duplicated).
    const GhssLevel& shelf0() const { return levels_.front(); }
    const GhssLevel& level(uint32_t l) const { return levels_.at(l); }
    const ShelfLevel& shelf(uint32_t j) const { return shelves_.at(j - 1); }
    const SubsampleFamily& subsample() const { return subsample_; }
    const SparseRecovery& last_level() const { return last_; }

    void update(uint64_t i, double v) {
        if (i >= cfg_.n) throw ConfigError("FpSketch::update: index out of range");
        f2_.update(i, v);
        const uint32_t deepest = subsample_.deepest(i);
        const uint32_t top = std::min(deepest, cfg_.L - 1);
        for (uint32_t l = 0; l <= top; ++l) {
            levels_[l].hh.update(i, v);
            levels_[l].ae.update(i, v);
        }
        if (deepest >= cfg_.L) last_.update(i, v);
        for (auto& sh : shelves_) {
            sh.hh.update(i, v);
            sh.ae.update(i, v);
        }
        ++update_count_;
    }

    void ingest(const std::vector<std::pair<uint64_t, double>>& updates) {
        for (const auto& [i, v] : updates) update(i, v);
    }

    // Linearity-based cleanup: replaying the negated stream returns every
    // cell to (numerically) zero far cheaper than a full memset at scale.
    void retract(const std::vector<std::pair<uint64_t, double>>& updates) {
        for (const auto& [i, v] : updates) update(i, -v);
        update_count_ -= 2 * updates.size();
    }

    void clear() {
        f2_.clear();
        for (auto& lv : levels_) {
            lv.hh.clear();
            lv.ae.clear();
        }
        last_.clear();
        for (auto& sh : shelves_) {
            sh.hh.clear();
            sh.ae.clear();
        }
        update_count_ = 0;
    }

    /// Re-key every hash family under a new master seed without reallocating
    /// the cell arrays. Cells must already be zero (fresh, clear()ed, or
    /// retract()ed) or the sketch contents become meaningless.
    void reseed(uint64_t seed) {
        seed_ = seed;
        subsample_ = SubsampleFamily(seed_, cfg_.k, cfg_.n, cfg_.L, cfg_.opts.prf_hash);
        f2_.reseed(seed_);
        for (auto& lv : levels_) {
            lv.hh.reseed(seed_);
            lv.ae.reseed(seed_);
        }
        last_.reseed(seed_);
        for (auto& sh : shelves_) {
            sh.hh.reseed(seed_);
            sh.ae.reseed(seed_);
        }
        coin_seed_ = derive_seed(seed_, SeedRole::Coin);
        update_count_ = 0;
    }

    void merge(const FpSketch& other) {
        if (!(cfg_ == other.cfg_) || seed_ != other.seed_) {
            throw ConfigError("FpSketch::merge: configuration or seed mismatch");
        }
        f2_.merge(other.f2_);
        for (uint32_t l = 0; l < cfg_.L; ++l) {
            levels_[l].hh.merge(other.levels_[l].hh);
            levels_[l].ae.merge(other.levels_[l].ae);
        }
        last_.merge(other.last_);
        for (size_t j = 0; j < shelves_.size(); ++j) {
            shelves_[j].hh.merge(other.shelves_[j].hh);
            shelves_[j].ae.merge(other.shelves_[j].ae);
        }
        update_count_ += other.update_count_;
    }

    double estimate_f2(std::optional<double> exact = std::nullopt) const {
        if (exact) {
            if (!(*exact >= 0.0)) throw ConfigError("estimate_f2: exact F2 must be nonnegative");
            return *exact;
        }
        return f2_.estimate();
    }

    FpEstimate estimate(std::optional<double> exact_f2 = std::nullopt) const {
        FpEstimate out;
        out.f2hat = estimate_f2(exact_f2);
        if (out.f2hat <= 0.0) {
            // All-zero stream.
            out.thresholds.f2hat = 0.0;
            return out;
        }
        const Thresholds thr = derive_thresholds(cfg_, out.f2hat);
        out.thresholds = thr;
        const double eb = cfg_.eps_bar;
        const uint32_t L = cfg_.L;

        // Level membership and HH point estimates, in ascending item order.
        std::vector<std::vector<uint64_t>> level_items(L);
        std::vector<std::vector<double>> level_est(L);
        std::vector<uint32_t> deepest(cfg_.n);
        for (uint64_t i = 0; i < cfg_.n; ++i) {
            deepest[i] = subsample_.deepest(i);
            uint32_t top = std::min(deepest[i], L - 1);
            for (uint32_t l = 0; l <= top; ++l) level_items[l].push_back(i);
        }
        for (uint32_t l = 0; l < L; ++l) {
            level_est[l].reserve(level_items[l].size());
            for (uint64_t i : level_items[l]) level_est[l].push_back(levels_[l].hh.point_estimate(i));
        }

        // Blocked sets (top-C_l per level) and their AvgEst bucket marks.
        std::vector<std::vector<uint64_t>> blocked(L);
        std::vector<BlockedMarks> marks;
        marks.reserve(L);
        for (uint32_t l = 0; l < L; ++l) {
            blocked[l] = top_items(level_items[l], level_est[l], cfg_.C_l[l]);
            marks.push_back(levels_[l].ae.make_marks(blocked[l]));
            std::sort(blocked[l].begin(), blocked[l].end());
        }

        // Shelf estimates and blocked sets (top-E_j).
        const uint32_t J = static_cast<uint32_t>(shelves_.size());
        std::vector<std::vector<double>> shelf_est(J);
        std::vector<std::vector<uint64_t>> shelf_blocked(J);
        std::vector<BlockedMarks> shelf_marks;
        shelf_marks.reserve(J);
        std::vector<uint64_t> all_items(cfg_.n);
        for (uint64_t i = 0; i < cfg_.n; ++i) all_items[i] = i;
        for (uint32_t j = 0; j < J; ++j) {
            shelf_est[j].reserve(cfg_.n);
            for (uint64_t i = 0; i < cfg_.n; ++i) shelf_est[j].push_back(shelves_[j].hh.point_estimate(i));
            const double e_j = eb * eb * static_cast<double>(shelves_[j].h_j);
            const uint64_t k_blocked = std::max<uint64_t>(1, static_cast<uint64_t>(std::ceil(e_j)));
            shelf_blocked[j] = top_items(all_items, shelf_est[j], k_blocked);
            shelf_marks.push_back(shelves_[j].ae.make_marks(shelf_blocked[j]));
            std::sort(shelf_blocked[j].begin(), shelf_blocked[j].end());
        }

        // Exact recovery of the level-L subsampled vector.
        const auto recovered = last_.recover();
        out.recovered_count = recovered.size();

        std::vector<size_t> cursor(L, 0);
        std::vector<double> item_shelf_est(J);
        std::vector<std::pair<uint32_t, double>> item_level_est;
        std::vector<std::pair<uint64_t, double>> recovered_discovered;
        item_level_est.reserve(L + 1);

        for (uint64_t i = 0; i < cfg_.n; ++i) {
            item_level_est.clear();
            bool any_signal = false;
            for (uint32_t l = 0; l < L; ++l) {
                if (cursor[l] < level_items[l].size() && level_items[l][cursor[l]] == i) {
                    double e = level_est[l][cursor[l]];
                    item_level_est.emplace_back(l, e);
                    if (e != 0.0) any_signal = true;
                    ++cursor[l];
                }
            }
            const bool in_last = deepest[i] >= L;
            if (in_last) {
                auto it = recovered.find(i);
                double v = it == recovered.end() ? 0.0 : it->second;
                item_level_est.emplace_back(L, v);
                if (v != 0.0) any_signal = true;
            }
            for (uint32_t j = 0; j < J; ++j) {
                item_shelf_est[j] = shelf_est[j][i];
                if (item_shelf_est[j] != 0.0) any_signal = true;
            }
            if (!any_signal) continue;

            DiscoveryOutcome disc = discover(item_shelf_est, item_level_est, thr, eb, L);
            switch (disc.kind) {
                case DiscoveryOutcome::Kind::None:
                    ++out.not_discovered;
                    break;
                case DiscoveryOutcome::Kind::Shelf: {
                    const uint32_t j = disc.index;
                    const auto& sh = shelves_[j - 1];
                    bool self = std::binary_search(shelf_blocked[j - 1].begin(), shelf_blocked[j - 1].end(), i);
                    CollisionReport rep =
                        sh.ae.collision_free_rows(i, shelf_marks[j - 1], shelf_blocked[j - 1], self);
                    if (!sh.ae.nocollision(rep)) {
                        push_drop(out, i, DropReason::NoCollision);
                        break;
                    }
                    AvgEstimate est = sh.ae.avg_estimate(rep, disc.hh_estimate < 0.0 ? -1 : 1);
                    if (!(est.value >= (1.0 - eb) * thr.U[j] && est.value <= (1.0 + eb) * thr.U[j + 1])) {
                        push_drop(out, i, DropReason::OutOfBand);
                        break;
                    }
                    Assignment a;
                    a.item = i;
                    a.kind = Assignment::Kind::Shelf;
                    a.index = j;
                    a.estimate = est.value;
                    a.scale = 1.0;
                    a.imag_diag = est.imag;
                    out.assignments.push_back(a);
                    ++out.discovered_shelf;
                    break;
                }
                case DiscoveryOutcome::Kind::Level: {
                    const uint32_t l = disc.index;
                    if (l == L) {
                        Assignment a;
                        a.item = i;
                        a.kind = Assignment::Kind::GhssLevel;
                        a.index = L;
                        a.estimate = std::abs(disc.hh_estimate);
                        a.scale = std::ldexp(1.0, static_cast<int>(L));
                        out.assignments.push_back(a);
                        recovered_discovered.emplace_back(i, disc.hh_estimate);
                        ++out.discovered_last_level;
                        break;
                    }
                    SampleDecision dec = sample_into_group(l, disc.hh_estimate, thr, coin_seed_, i);
                    if (!dec.sampled) {
                        push_drop(out, i, DropReason::CoinTails);
                        ++out.dropped_coin;
                        break;
                    }
                    const auto& lv = levels_[l];
                    bool self = std::binary_search(blocked[l].begin(), blocked[l].end(), i);
                    CollisionReport rep = lv.ae.collision_free_rows(i, marks[l], blocked[l], self);
                    if (!lv.ae.nocollision(rep)) {
                        push_drop(out, i, DropReason::NoCollision);
                        break;
                    }
                    AvgEstimate est = lv.ae.avg_estimate(rep, disc.hh_estimate < 0.0 ? -1 : 1);
                    if (!(est.value >= (1.0 - eb) * thr.T[l] && est.value <= (1.0 + eb) * thr.upper(l))) {
                        push_drop(out, i, DropReason::OutOfBand);
                        break;
                    }
                    Assignment a;
                    a.item = i;
                    a.kind = Assignment::Kind::GhssLevel;
                    a.index = dec.group;
                    a.estimate = est.value;
                    a.scale = std::ldexp(1.0, static_cast<int>(dec.group));
                    a.imag_diag = est.imag;
                    out.assignments.push_back(a);
                    ++out.discovered_level;
                    break;
                }
            }
        }

        out.fp_shelf = shelf_contribution(out.assignments, cfg_.p);
        out.fp_ghss = ghss_contribution(out.assignments, recovered_discovered, cfg_.p, L);
        out.fp = out.fp_shelf + out.fp_ghss;
        return out;
    }

    std::vector<uint8_t> serialize() const {
        BlobWriter w;
        w.magic("FPSK");
        w.u32(1);  // format version
        w.u64(cfg_.n);
        w.f64(cfg_.p);
        w.f64(cfg_.eps);
        w.f64(cfg_.delta);
        w.f64(cfg_.opts.c_C);
        w.f64(cfg_.opts.c_s);
        w.f64(cfg_.opts.c_H);
        w.f64(cfg_.opts.c_w);
        w.f64(cfg_.opts.c_F2);
        w.f64(cfg_.opts.nu);
        w.u32(cfg_.opts.k_max);
        w.u32(cfg_.opts.bucket_mult);
        w.f64(cfg_.opts.kappa);
        w.f64(cfg_.opts.c_regime);
        w.u32(static_cast<uint32_t>(cfg_.opts.shelves));
        w.u32(cfg_.opts.prf_hash ? 1 : 0);
        w.u32(cfg_.opts.exact_f2 ? 1 : 0);
        w.u64(seed_);
        w.u64(update_count_);
        // Derived-geometry checks.
        w.u64(cfg_.C);
        w.u32(cfg_.L);
        w.u32(cfg_.s);
        w.u64(cfg_.q);
        w.u32(cfg_.k);
        f2_.write(w);
        for (const auto& lv : levels_) {
            lv.hh.write(w);
            lv.ae.write(w);
        }
        last_.write(w);
        for (const auto& sh : shelves_) {
            sh.hh.write(w);
            sh.ae.write(w);
        }
        return w.take();
    }

    static FpSketch deserialize(const std::vector<uint8_t>& bytes) {
        BlobReader r(bytes);
        r.expect_magic("FPSK");
        if (r.u32() != 1) throw ParseError("unsupported sketch format version");
        uint64_t n = r.u64();
        double p = r.f64();
        double eps = r.f64();
        double delta = r.f64();
        ConfigOverrides opts;
        opts.c_C = r.f64();
        opts.c_s = r.f64();
        opts.c_H = r.f64();
        opts.c_w = r.f64();
        opts.c_F2 = r.f64();
        opts.nu = r.f64();
        opts.k_max = r.u32();
        opts.bucket_mult = r.u32();
        opts.kappa = r.f64();
        opts.c_regime = r.f64();
        opts.shelves = static_cast<ShelvesMode>(r.u32());
        opts.prf_hash = r.u32() != 0;
        opts.exact_f2 = r.u32() != 0;
        uint64_t seed = r.u64();
        uint64_t update_count = r.u64();
        FpConfig cfg = config_derive(n, p, eps, delta, opts);
        if (r.u64() != cfg.C || r.u32() != cfg.L || r.u32() != cfg.s || r.u64() != cfg.q ||
            r.u32() != cfg.k) {
            throw ParseError("sketch blob derived geometry does not match this build");
        }
        FpSketch sk(cfg, seed);
        sk.update_count_ = update_count;
        sk.f2_.read(r);
        for (auto& lv : sk.levels_) {
            lv.hh.read(r);
            lv.ae.read(r);
        }
        sk.last_.read(r);
        for (auto& sh : sk.shelves_) {
            sh.hh.read(r);
            sh.ae.read(r);
        }
        return sk;
    }

private:
    static void push_drop(FpEstimate& out, uint64_t item, DropReason reason) {
        Assignment a;
        a.item = item;
        a.kind = Assignment::Kind::Dropped;
        a.reason = reason;
        out.assignments.push_back(a);
        if (reason == DropReason::NoCollision) ++out.dropped_nocollision;
        if (reason == DropReason::OutOfBand) ++out.dropped_band;
    }

    static std::vector<uint64_t> top_items(const std::vector<uint64_t>& items,
                                           const std::vector<double>& est, uint64_t k) {
        if (k >= items.size()) return items;
        std::vector<size_t> order(items.size());
        for (size_t t = 0; t < order.size(); ++t) order[t] = t;
        auto cmp = [&](size_t a, size_t b) {
            double fa = std::abs(est[a]), fb = std::abs(est[b]);
            if (fa != fb) return fa > fb;
            return items[a] < items[b];
        };
        std::nth_element(order.begin(), order.begin() + k, order.end(), cmp);
        std::vector<uint64_t> out;
        out.reserve(k);
        for (size_t t = 0; t < k; ++t) out.push_back(items[order[t]]);
        return out;
    }

    FpConfig cfg_;
    uint64_t seed_ = 0;
    uint64_t coin_seed_ = 0;
    uint64_t update_count_ = 0;
    SubsampleFamily subsample_;
    F2Bank f2_;
    std::vector<GhssLevel> levels_;
    SparseRecovery last_;
    std::vector<ShelfLevel> shelves_;
};

}  // namespace fpsketch
