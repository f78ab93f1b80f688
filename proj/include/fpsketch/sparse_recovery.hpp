#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fpsketch/errors.hpp"
#include "fpsketch/kwise.hpp"
#include "fpsketch/prf.hpp"
#include "fpsketch/serialize.hpp"

namespace fpsketch {

/// Exact sparse recovery by CountSketch peeling. Each row keeps three linear
/// measurements per bucket: the value sum, the index-weighted sum and a
/// fingerprint-weighted checksum. A bucket holding a single item is detected
/// by the key ratio plus the checksum, peeled, and subtracted everywhere.
/// Recovery succeeds only if the residual is zero afterwards and no more than
/// `capacity` items were extracted; otherwise RecoveryError is thrown.
class SparseRecovery {
public:
    SparseRecovery() = default;

    SparseRecovery(uint32_t rows, uint64_t buckets, uint64_t capacity, uint64_t domain, uint64_t seed,
                   uint32_t k, bool prf = false)
        : rows_(rows), buckets_(buckets), capacity_(capacity), domain_(domain), seed_(seed), k_(k), prf_(prf) {
        if (rows < 1 || buckets < 1) throw ConfigError("SparseRecovery: rows and buckets must be >= 1");
        size_t cells = static_cast<size_t>(rows) * buckets;
        vsum_.assign(cells, 0.0);
        ksum_.assign(cells, 0.0);
        fsum_.assign(cells, 0.0);
        rebuild_hashes();
    }

    /// Swap in a fresh hash family; cells are expected to be zero.
    void reseed(uint64_t seed) {
        seed_ = seed;
        rebuild_hashes();
        scale_ = 0.0;
    }

    uint32_t rows() const { return rows_; }
    uint64_t buckets() const { return buckets_; }
    uint64_t capacity() const { return capacity_; }
    size_t cell_count() const { return vsum_.size() * 3; }

    void update(uint64_t i, double v) {
        if (i >= domain_) throw ConfigError("SparseRecovery: index out of domain");
        const double fp = fingerprint(i);
        const double iw = static_cast<double>(i);
        for (uint32_t r = 0; r < rows_; ++r) {
            size_t c = static_cast<size_t>(r) * buckets_ + hash_[r].eval(i);
            vsum_[c] += v;
            ksum_[c] += v * iw;
            fsum_[c] += v * fp;
        }
        scale_ = std::max(scale_, std::abs(v));
    }

    /// Peel and return the recovered sparse vector.
    std::unordered_map<uint64_t, double> recover() const {
        std::vector<double> v = vsum_, kw = ksum_, f = fsum_;
        const double tol = 1e-9 * std::max(1.0, scale_);
        std::unordered_map<uint64_t, double> out;

        std::vector<size_t> work;
        std::vector<uint8_t> queued(v.size(), 0);
        work.reserve(1024);
        for (size_t c = 0; c < v.size(); ++c) {
            if (std::abs(v[c]) > tol) {
                work.push_back(c);
                queued[c] = 1;
            }
        }

        while (!work.empty()) {
            size_t c = work.back();
            work.pop_back();
            queued[c] = 0;
            uint64_t idx;
            if (!pure_cell(v, kw, f, c, tol, idx)) continue;
            const double val = v[c];
            out[idx] += val;
            if (out.size() > capacity_) {
                throw RecoveryError("recovery-failed: item count exceeds sized capacity");
            }
            const double fp = fingerprint(idx);
            const double iw = static_cast<double>(idx);
            for (uint32_t r = 0; r < rows_; ++r) {
                size_t c2 = static_cast<size_t>(r) * buckets_ + hash_[r].eval(idx);
                v[c2] -= val;
                kw[c2] -= val * iw;
                f[c2] -= val * fp;
                if (std::abs(v[c2]) > tol && !queued[c2]) {
                    work.push_back(c2);
                    queued[c2] = 1;
                }
            }
        }

        for (size_t c = 0; c < v.size(); ++c) {
            if (std::abs(v[c]) > tol) {
                throw RecoveryError("recovery-failed: nonzero residual after peeling stalled");
            }
        }
        for (auto it = out.begin(); it != out.end();) {
            if (std::abs(it->second) <= tol) {
                it = out.erase(it);
            } else {
                ++it;
            }
        }
        return out;
    }

    void merge(const SparseRecovery& other) {
        if (rows_ != other.rows_ || buckets_ != other.buckets_ || seed_ != other.seed_ ||
            domain_ != other.domain_ || k_ != other.k_) {
            throw ConfigError("SparseRecovery::merge: mismatched configuration or seed");
        }
        for (size_t c = 0; c < vsum_.size(); ++c) {
            vsum_[c] += other.vsum_[c];
            ksum_[c] += other.ksum_[c];
            fsum_[c] += other.fsum_[c];
        }
        scale_ = std::max(scale_, other.scale_);
    }

    void clear() {
        std::fill(vsum_.begin(), vsum_.end(), 0.0);
        std::fill(ksum_.begin(), ksum_.end(), 0.0);
        std::fill(fsum_.begin(), fsum_.end(), 0.0);
        scale_ = 0.0;
    }

    void write(BlobWriter& w) const {
        w.magic("REC1");
        w.u32(rows_);
        w.u64(buckets_);
        w.u64(capacity_);
        w.u64(seed_);
        w.u32(k_);
        w.u64(domain_);
        w.f64(scale_);
        w.f64_span(vsum_.data(), vsum_.size());
        w.f64_span(ksum_.data(), ksum_.size());
        w.f64_span(fsum_.data(), fsum_.size());
    }

    void read(BlobReader& r) {
        r.expect_magic("REC1");
        if (r.u32() != rows_ || r.u64() != buckets_ || r.u64() != capacity_ || r.u64() != seed_ ||
            r.u32() != k_ || r.u64() != domain_) {
            throw ParseError("SparseRecovery blob header does not match configuration");
        }
        scale_ = r.f64();
        r.f64_span(vsum_.data(), vsum_.size());
        r.f64_span(ksum_.data(), ksum_.size());
        r.f64_span(fsum_.data(), fsum_.size());
    }

private:
    double fingerprint(uint64_t i) const {
        // Deterministic value in [1, 2): immune to relative-error blowups.
        return 1.0 + static_cast<double>(prf64(fseed_, i) >> 11) * 0x1.0p-53;
    }

    bool pure_cell(const std::vector<double>& v, const std::vector<double>& kw,
                   const std::vector<double>& f, size_t c, double tol, uint64_t& idx) const {
        if (std::abs(v[c]) <= tol) return false;
        const double ratio = kw[c] / v[c];
        if (!(ratio > -0.5) || ratio >= static_cast<double>(domain_)) return false;
        const double rounded = std::nearbyint(ratio);
        if (std::abs(ratio - rounded) > 1e-6 * std::max(1.0, std::abs(ratio))) return false;
        idx = static_cast<uint64_t>(rounded);
        if (idx >= domain_) return false;
        const uint32_t row = static_cast<uint32_t>(c / buckets_);
        if (hash_[row].eval(idx) != c % buckets_) return false;
        const double expect = v[c] * fingerprint(idx);
        return std::abs(f[c] - expect) <= 1e-6 * std::max({std::abs(f[c]), std::abs(expect), 1.0}) + tol;
    }

    void rebuild_hashes() {
        hash_.clear();
        hash_.reserve(rows_);
        for (uint32_t r = 0; r < rows_; ++r) {
            hash_.emplace_back(derive_seed(seed_, SeedRole::Recovery, r), k_, domain_, buckets_, prf_);
        }
        fseed_ = derive_seed(seed_, SeedRole::RecoveryFingerprint);
    }

    uint32_t rows_ = 0;
    uint64_t buckets_ = 0;
    uint64_t capacity_ = 0;
    uint64_t domain_ = 0;
    uint64_t seed_ = 0;
    uint32_t k_ = 0;
    bool prf_ = false;
    uint64_t fseed_ = 0;
    double scale_ = 0.0;
    std::vector<double> vsum_, ksum_, fsum_;
    std::vector<KWiseHash> hash_;
};

}  // namespace fpsketch
