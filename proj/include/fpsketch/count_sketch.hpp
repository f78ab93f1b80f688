#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fpsketch/errors.hpp"
#include "fpsketch/kwise.hpp"
#include "fpsketch/prf.hpp"
#include "fpsketch/serialize.hpp"

namespace fpsketch {

/// CountSketch table bank: `rows` independent repetitions of `buckets`
/// signed accumulators. Point estimates take the lower median across rows.
class CsStructure {
public:
    CsStructure() = default;

    CsStructure(uint32_t rows, uint64_t buckets, uint64_t domain, uint64_t seed, uint32_t k,
                bool prf = false, SeedRole bucket_role = SeedRole::GhssHHBucket,
                SeedRole sign_role = SeedRole::GhssHHSign, uint64_t role_index = 0)
        : rows_(rows),
          buckets_(buckets),
          domain_(domain),
          seed_(seed),
          k_(k),
          prf_(prf),
          bucket_role_(bucket_role),
          sign_role_(sign_role),
          role_index_(role_index) {
        if (rows < 1 || buckets < 1) throw ConfigError("CsStructure: rows and buckets must be >= 1");
        cells_.assign(static_cast<size_t>(rows) * buckets, 0.0);
        rebuild_hashes();
    }

    /// Swap in a fresh hash family; cells are expected to be zero.
    void reseed(uint64_t seed) {
        seed_ = seed;
        rebuild_hashes();
        update_count_ = 0;
    }

    uint32_t rows() const { return rows_; }
    uint64_t buckets() const { return buckets_; }
    uint64_t domain() const { return domain_; }
    uint64_t seed() const { return seed_; }
    uint64_t update_count() const { return update_count_; }
    size_t cell_count() const { return cells_.size(); }
    const std::vector<double>& cells() const { return cells_; }

    uint64_t bucket_of(uint32_t row, uint64_t i) const { return bucket_hash_[row].eval(i); }
    double sign_of(uint32_t row, uint64_t i) const { return sign_hash_[row].eval(i) ? 1.0 : -1.0; }

    void update(uint64_t i, double v) {
        for (uint32_t r = 0; r < rows_; ++r) {
            cells_[static_cast<size_t>(r) * buckets_ + bucket_of(r, i)] += sign_of(r, i) * v;
        }
        ++update_count_;
    }

    double point_estimate(uint64_t i) const {
        // Lower median over rows of sign * cell.
        thread_local std::vector<double> ests;
        ests.clear();
        ests.reserve(rows_);
        for (uint32_t r = 0; r < rows_; ++r) {
            ests.push_back(sign_of(r, i) * cells_[static_cast<size_t>(r) * buckets_ + bucket_of(r, i)]);
        }
        size_t mid = (ests.size() - 1) / 2;
        std::nth_element(ests.begin(), ests.begin() + mid, ests.end());
        return ests[mid];
    }

    /// Top-k candidates by |point_estimate|, ties broken by smaller index.
    std::vector<std::pair<uint64_t, double>> top_k(size_t k, const std::vector<uint64_t>& candidates) const {
        std::vector<std::pair<uint64_t, double>> all;
        all.reserve(candidates.size());
        for (uint64_t i : candidates) all.emplace_back(i, point_estimate(i));
        auto cmp = [](const auto& a, const auto& b) {
            double fa = std::abs(a.second), fb = std::abs(b.second);
            if (fa != fb) return fa > fb;
            return a.first < b.first;
        };
        if (k < all.size()) {
            std::nth_element(all.begin(), all.begin() + k, all.end(), cmp);
            all.resize(k);
        }
        std::sort(all.begin(), all.end(), cmp);
        return all;
    }

    void merge(const CsStructure& other) {
        if (rows_ != other.rows_ || buckets_ != other.buckets_ || seed_ != other.seed_ ||
            domain_ != other.domain_ || k_ != other.k_) {
            throw ConfigError("CsStructure::merge: mismatched configuration or seed");
        }
        for (size_t c = 0; c < cells_.size(); ++c) cells_[c] += other.cells_[c];
        update_count_ += other.update_count_;
    }

    void clear() {
        std::fill(cells_.begin(), cells_.end(), 0.0);
        update_count_ = 0;
    }

    void write(BlobWriter& w) const {
        w.magic("CSK1");
        w.u32(rows_);
        w.u64(buckets_);
        w.u64(seed_);
        w.u32(k_);
        w.u64(domain_);
        w.u64(update_count_);
        w.f64_span(cells_.data(), cells_.size());
    }

    // Reads cells into an already-constructed structure (hashes come from the
    // config + seed, which the header must match).
    void read(BlobReader& r) {
        r.expect_magic("CSK1");
        uint32_t rows = r.u32();
        uint64_t buckets = r.u64();
        uint64_t seed = r.u64();
        uint32_t k = r.u32();
        uint64_t domain = r.u64();
        if (rows != rows_ || buckets != buckets_ || seed != seed_ || k != k_ || domain != domain_) {
            throw ParseError("CsStructure blob header does not match configuration");
        }
        update_count_ = r.u64();
        r.f64_span(cells_.data(), cells_.size());
    }

private:
    void rebuild_hashes() {
        bucket_hash_.clear();
        sign_hash_.clear();
        bucket_hash_.reserve(rows_);
        sign_hash_.reserve(rows_);
        for (uint32_t r = 0; r < rows_; ++r) {
            bucket_hash_.emplace_back(derive_seed(seed_, bucket_role_, role_index_, r), k_, domain_,
                                      buckets_, prf_);
            sign_hash_.emplace_back(derive_seed(seed_, sign_role_, role_index_, r), k_, domain_, 2, prf_);
        }
    }

    uint32_t rows_ = 0;
    uint64_t buckets_ = 0;
    uint64_t domain_ = 0;
    uint64_t seed_ = 0;
    uint32_t k_ = 0;
    bool prf_ = false;
    SeedRole bucket_role_ = SeedRole::GhssHHBucket;
    SeedRole sign_role_ = SeedRole::GhssHHSign;
    uint64_t role_index_ = 0;
    uint64_t update_count_ = 0;
    std::vector<double> cells_;
    std::vector<KWiseHash> bucket_hash_;
    std::vector<KWiseHash> sign_hash_;
};

}  // namespace fpsketch
