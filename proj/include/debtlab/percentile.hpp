#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace debtlab {

// Percentile by sorted-sample linear interpolation between closest ranks:
// rank h = 1 + (n-1) p, value = s[k] + (h-k)(s[k+1]-s[k]) with 1-based k.
// This is the convention that reproduces the shipped damage-distribution
// anchors; it is pinned by tests, do not swap it for a nearest-rank rule.
inline double percentile(std::vector<double> xs, double p) {
    if (xs.empty()) throw std::invalid_argument("percentile of empty sample set");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("percentile level must be in (0,1)");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    const double h = 1.0 + static_cast<double>(n - 1) * p;
    auto k = static_cast<std::size_t>(std::floor(h));
    if (k >= n) return xs[n - 1];
    if (k < 1) return xs[0];
    const double frac = h - static_cast<double>(k);
    return xs[k - 1] + frac * (xs[k] - xs[k - 1]);
}

// Orientation of a channel's adverse direction. A "5th percentile severity"
// means the bad tail: the lower tail for series that worsen downward (growth,
// primary balance, deflator), the upper tail for those that worsen upward
// (interest rates, damage ratios).
enum class AdverseDirection { kDown, kUp };

inline double severity_percentile(std::vector<double> xs, double p, AdverseDirection dir) {
    return percentile(std::move(xs), dir == AdverseDirection::kDown ? p : 1.0 - p);
}

}  // namespace debtlab
