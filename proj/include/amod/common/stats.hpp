#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "amod/common/error.hpp"

namespace amod {

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw ConfigError("mean of empty set");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// unbiased sample variance (n-1 denominator)
inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) throw ConfigError("sample variance needs >= 2 values");
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// linear-interpolation percentile, pct in [0, 100]
inline double percentile(std::vector<double> v, double pct) {
    if (v.empty()) throw ConfigError("percentile of empty set");
    std::sort(v.begin(), v.end());
    const double rank = pct / 100.0 * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
    const double frac = rank - static_cast<double>(lo);
    return v[lo] + (v[hi] - v[lo]) * frac;
}

}  // namespace amod
