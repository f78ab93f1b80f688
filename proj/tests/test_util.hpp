#pragma once

#include <cmath>
#include <numeric>
#include <vector>

namespace testutil {

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
    double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

inline double standard_error(const std::vector<double>& v) {
    return stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace testutil
