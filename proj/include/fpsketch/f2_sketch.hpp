#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fpsketch/count_sketch.hpp"

namespace fpsketch {

/// AMS-style F2 estimator: a CountSketch bank where each row's sum of squared
/// buckets is an unbiased F2 estimate; the bank reports the median row,
/// inflated by (1 + kappa) so the output upper-bounds F2 with the target
/// confidence.
class F2Bank {
public:
    F2Bank() = default;

    F2Bank(uint32_t rows, uint64_t buckets, uint64_t domain, uint64_t seed, uint32_t k, double kappa,
           bool prf = false)
        : kappa_(kappa),
          cs_(rows, buckets, domain, seed, k, prf, SeedRole::F2Bucket, SeedRole::F2Sign) {}

    void update(uint64_t i, double v) { cs_.update(i, v); }

    double estimate() const {
        std::vector<double> per_row(cs_.rows());
        const auto& cells = cs_.cells();
        for (uint32_t r = 0; r < cs_.rows(); ++r) {
            double acc = 0.0;
            const double* row = cells.data() + static_cast<size_t>(r) * cs_.buckets();
            for (uint64_t b = 0; b < cs_.buckets(); ++b) acc += row[b] * row[b];
            per_row[r] = acc;
        }
        size_t mid = (per_row.size() - 1) / 2;
        std::nth_element(per_row.begin(), per_row.begin() + mid, per_row.end());
        return (1.0 + kappa_) * per_row[mid];
    }

    void merge(const F2Bank& other) { cs_.merge(other.cs_); }
    void clear() { cs_.clear(); }
    void reseed(uint64_t seed) { cs_.reseed(seed); }
    size_t cell_count() const { return cs_.cell_count(); }

    void write(BlobWriter& w) const { cs_.write(w); }
    void read(BlobReader& r) { cs_.read(r); }

private:
    double kappa_ = 0.05;
    CsStructure cs_;
};

}  // namespace fpsketch
