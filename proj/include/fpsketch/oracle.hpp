#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "fpsketch/errors.hpp"

namespace fpsketch {
namespace oracle {

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Exact F_p = sum_i |x_i|^p.
inline double exact_fp(const std::vector<double>& x, double p) {
    if (p <= 0.0) throw ConfigError("exact_fp: p must be positive");
    CompensatedSum s;
    for (double v : x) {
        if (v != 0.0) s.add(std::pow(std::abs(v), p));
    }
    return s.value();
}

/// Residual second moment: sum of squares excluding the top-k coordinates
/// by |x_i|, ties broken toward the smaller index.
inline double exact_f2_res(const std::vector<double>& x, size_t k) {
    if (k > x.size()) throw ConfigError("exact_f2_res: k exceeds dimension");
    std::vector<size_t> order(x.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        double fa = std::abs(x[a]), fb = std::abs(x[b]);
        if (fa != fb) return fa > fb;
        return a < b;
    });
    CompensatedSum s;
    for (size_t j = k; j < order.size(); ++j) {
        double v = x[order[j]];
        s.add(v * v);
    }
    return s.value();
}

/// Aggregate a turnstile stream into the dense frequency vector.
inline std::vector<double> accumulate_stream(const std::vector<std::pair<uint64_t, double>>& updates,
                                             uint64_t n) {
    if (n > (uint64_t(1) << 22)) throw ConfigError("accumulate_stream: dense accumulation capped at n = 2^22");
    std::vector<double> x(n, 0.0);
    for (const auto& [i, v] : updates) {
        if (i >= n) throw ConfigError("accumulate_stream: index out of range");
        x[i] += v;
    }
    return x;
}

}  // namespace oracle
}  // namespace fpsketch
