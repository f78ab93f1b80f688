#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "fpsketch/errors.hpp"
#include "fpsketch/kwise.hpp"
#include "fpsketch/prf.hpp"
#include "fpsketch/serialize.hpp"

namespace fpsketch {

/// Rows of an AvgEst structure where an item avoids every blocked item.
struct CollisionReport {
    uint64_t item = 0;
    std::vector<uint32_t> free_rows;
    size_t blocked_count = 0;
};

struct AvgEstimate {
    double value = 0.0;  // real part of the averaged estimate
    double imag = 0.0;   // imaginary part, diagnostic only
    uint32_t rows_used = 0;
};

/// Per-row bucket occupancy of a blocked set, for O(rows) collision checks.
class BlockedMarks {
public:
    BlockedMarks(uint32_t rows, size_t blocked_count) : occupied_(rows), blocked_count_(blocked_count) {}
    std::vector<uint64_t>& row(uint32_t r) { return occupied_[r]; }
    const std::vector<uint64_t>& row(uint32_t r) const { return occupied_[r]; }
    size_t blocked_count() const { return blocked_count_; }
    void finalize() {
        for (auto& v : occupied_) std::sort(v.begin(), v.end());
    }
    bool occupied(uint32_t r, uint64_t bucket) const {
        const auto& v = occupied_[r];
        return std::binary_search(v.begin(), v.end(), bucket);
    }

private:
    std::vector<std::vector<uint64_t>> occupied_;
    size_t blocked_count_;
};

/// AvgEst table bank: complex accumulators with q-th roots-of-unity
/// coefficients. The estimate for an item is the average over collision-free
/// rows of T_r[h_r(i)] * conj(w_r(i)) * sign, whose real part estimates |x_i|.
class AeStructure {
public:
    AeStructure() = default;

    AeStructure(uint32_t rows, uint64_t buckets, uint64_t domain, uint64_t q, uint64_t seed, uint32_t k,
                bool prf = false, SeedRole bucket_role = SeedRole::GhssAEBucket,
                SeedRole root_role = SeedRole::GhssAERoot, uint64_t role_index = 0)
        : rows_(rows),
          buckets_(buckets),
          domain_(domain),
          q_(q),
          seed_(seed),
          k_(k),
          prf_(prf),
          bucket_role_(bucket_role),
          root_role_(root_role),
          role_index_(role_index) {
        if (rows < 1 || buckets < 1) throw ConfigError("AeStructure: rows and buckets must be >= 1");
        if (rows % 2 != 0) throw ConfigError("AeStructure: row count must be even (2s repetitions)");
        cells_.assign(static_cast<size_t>(rows) * buckets, {0.0, 0.0});
        rebuild_hashes();
    }

    /// Swap in a fresh hash/root family; cells are expected to be zero.
    void reseed(uint64_t seed) {
        seed_ = seed;
        rebuild_hashes();
        update_count_ = 0;
    }

    // Test constructor with explicit per-row hashes and root families.
    static AeStructure with_parts(std::vector<KWiseHash> bucket_hash, std::vector<RootsFamily> roots,
                                  uint64_t buckets, uint64_t domain) {
        AeStructure t;
        t.rows_ = static_cast<uint32_t>(bucket_hash.size());
        t.buckets_ = buckets;
        t.domain_ = domain;
        t.q_ = roots.empty() ? 0 : roots.front().q();
        t.bucket_hash_ = std::move(bucket_hash);
        t.roots_ = std::move(roots);
        t.cells_.assign(static_cast<size_t>(t.rows_) * buckets, {0.0, 0.0});
        return t;
    }

    uint32_t rows() const { return rows_; }
    uint64_t buckets() const { return buckets_; }
    uint64_t q() const { return q_; }
    uint64_t domain() const { return domain_; }
    size_t cell_count() const { return cells_.size(); }
    const std::vector<std::complex<double>>& cells() const { return cells_; }

    uint64_t bucket_of(uint32_t row, uint64_t i) const { return bucket_hash_[row].eval(i); }
    std::complex<double> root_of(uint32_t row, uint64_t i) const { return roots_[row].root(i); }

    void update(uint64_t i, double v) {
        for (uint32_t r = 0; r < rows_; ++r) {
            cells_[static_cast<size_t>(r) * buckets_ + bucket_of(r, i)] += v * root_of(r, i);
        }
        ++update_count_;
    }

    BlockedMarks make_marks(const std::vector<uint64_t>& blocked) const {
        BlockedMarks marks(rows_, blocked.size());
        for (uint32_t r = 0; r < rows_; ++r) {
            auto& row = marks.row(r);
            row.reserve(blocked.size());
            for (uint64_t j : blocked) row.push_back(bucket_of(r, j));
        }
        marks.finalize();
        return marks;
    }

    /// Rows where none of the blocked items (other than i itself) shares
    /// i's bucket. An occurrence of i inside `blocked` is neutralized by
    /// checking whether the only occupant of i's bucket is i.
    CollisionReport collision_free_rows(uint64_t i, const std::vector<uint64_t>& blocked) const {
        CollisionReport rep;
        rep.item = i;
        rep.blocked_count = blocked.size();
        for (uint32_t r = 0; r < rows_; ++r) {
            uint64_t b = bucket_of(r, i);
            bool hit = false;
            for (uint64_t j : blocked) {
                if (j != i && bucket_of(r, j) == b) {
                    hit = true;
                    break;
                }
            }
            if (!hit) rep.free_rows.push_back(r);
        }
        return rep;
    }

    /// Same check against precomputed marks. `self_marked` says whether i is
    /// part of the blocked set behind `marks`; if so a single occupancy of
    /// i's bucket may be i itself, which we verify by re-hashing.
    CollisionReport collision_free_rows(uint64_t i, const BlockedMarks& marks,
                                        const std::vector<uint64_t>& blocked, bool self_marked) const {
        CollisionReport rep;
        rep.item = i;
        rep.blocked_count = marks.blocked_count();
        for (uint32_t r = 0; r < rows_; ++r) {
            uint64_t b = bucket_of(r, i);
            if (!marks.occupied(r, b)) {
                rep.free_rows.push_back(r);
            } else if (self_marked) {
                bool other = false;
                for (uint64_t j : blocked) {
                    if (j != i && bucket_of(r, j) == b) {
                        other = true;
                        break;
                    }
                }
                if (!other) rep.free_rows.push_back(r);
            }
        }
        return rep;
    }

    bool nocollision(const CollisionReport& rep) const {
        return 2 * rep.free_rows.size() >= rows_;
    }

    AvgEstimate avg_estimate(const CollisionReport& rep, int sign) const {
        if (rep.free_rows.empty()) throw NoFreeRowError("avg_estimate: no collision-free row for item");
        if (sign != 1 && sign != -1) throw ConfigError("avg_estimate: sign must be +1 or -1");
        std::complex<double> acc{0.0, 0.0};
        for (uint32_t r : rep.free_rows) {
            uint64_t b = bucket_of(r, rep.item);
            acc += cells_[static_cast<size_t>(r) * buckets_ + b] * roots_[r].conj_root(rep.item);
        }
        acc *= static_cast<double>(sign) / static_cast<double>(rep.free_rows.size());
        return {acc.real(), acc.imag(), static_cast<uint32_t>(rep.free_rows.size())};
    }

    void merge(const AeStructure& other) {
        if (rows_ != other.rows_ || buckets_ != other.buckets_ || seed_ != other.seed_ ||
            domain_ != other.domain_ || q_ != other.q_ || k_ != other.k_) {
            throw ConfigError("AeStructure::merge: mismatched configuration or seed");
        }
        for (size_t c = 0; c < cells_.size(); ++c) cells_[c] += other.cells_[c];
        update_count_ += other.update_count_;
    }

    void clear() {
        std::fill(cells_.begin(), cells_.end(), std::complex<double>{0.0, 0.0});
        update_count_ = 0;
    }

    void write(BlobWriter& w) const {
        w.magic("AES1");
        w.u32(rows_);
        w.u64(buckets_);
        w.u64(seed_);
        w.u32(k_);
        w.u64(domain_);
        w.u64(q_);
        w.u64(update_count_);
        w.c128_span(cells_.data(), cells_.size());
    }

    void read(BlobReader& r) {
        r.expect_magic("AES1");
        uint32_t rows = r.u32();
        uint64_t buckets = r.u64();
        uint64_t seed = r.u64();
        uint32_t k = r.u32();
        uint64_t domain = r.u64();
        uint64_t q = r.u64();
        if (rows != rows_ || buckets != buckets_ || seed != seed_ || k != k_ || domain != domain_ ||
            q != q_) {
            throw ParseError("AeStructure blob header does not match configuration");
        }
        update_count_ = r.u64();
        r.c128_span(cells_.data(), cells_.size());
    }

private:
    void rebuild_hashes() {
        bucket_hash_.clear();
        roots_.clear();
        bucket_hash_.reserve(rows_);
        roots_.reserve(rows_);
        for (uint32_t r = 0; r < rows_; ++r) {
            bucket_hash_.emplace_back(derive_seed(seed_, bucket_role_, role_index_, r), k_, domain_,
                                      buckets_, prf_);
            roots_.emplace_back(derive_seed(seed_, root_role_, role_index_, r), k_, domain_, q_, prf_);
        }
    }

    uint32_t rows_ = 0;
    uint64_t buckets_ = 0;
    uint64_t domain_ = 0;
    uint64_t q_ = 0;
    uint64_t seed_ = 0;
    uint32_t k_ = 0;
    bool prf_ = false;
    SeedRole bucket_role_ = SeedRole::GhssAEBucket;
    SeedRole root_role_ = SeedRole::GhssAERoot;
    uint64_t role_index_ = 0;
    uint64_t update_count_ = 0;
    std::vector<std::complex<double>> cells_;
    std::vector<KWiseHash> bucket_hash_;
    std::vector<RootsFamily> roots_;
};

}  // namespace fpsketch
