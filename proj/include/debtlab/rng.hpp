#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace debtlab::rng {

// Counter-based generator "ctr64/v1". A draw is addressed by
// (seed, stream tag, counter a, counter b); the word is a chain of SplitMix64
// finalizer passes. Stateless, so any (iteration, year, channel) cell can be
// generated independently and in any order, which is what makes parallel fan
// simulation bit-identical to the serial run.
inline constexpr const char* kVersion = "ctr64/v1";

inline constexpr std::uint64_t kStreamPerPeriod = 0x5045525045524431ull;
inline constexpr std::uint64_t kStreamFan = 0x46414E5F43485254ull;

inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t word(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t a, std::uint64_t b) {
    return mix(mix(mix(mix(seed) ^ stream) ^ a) ^ b);
}

// Map to the open interval (0,1); 53-bit mantissa, never returns 0 or 1.
// The top 2048 words would round to exactly 1.0 (2^53 - 0.5 rounds up under
// ties-to-even), so they are pinned to the largest double below 1.
inline double to_unit(std::uint64_t w) {
    const double u = (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
    return u < 1.0 ? u : 0x1.fffffffffffffp-1;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t a, std::uint64_t b) {
    return to_unit(word(seed, stream, a, b));
}

// Inverse standard normal CDF, Wichura's double-precision rational
// approximation (max error ~1e-16 on (0,1)). Horner evaluation order matters
// for cross-platform bit reproducibility; keep as written.
inline double normal_inverse(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_inverse domain is (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                  + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
              + 1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                  + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
              + 4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double num;
    double den;
    if (r <= 5.0) {
        r -= 1.6;
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0);
    }
    const double val = num / den;
    return q < 0 ? -val : val;
}

}  // namespace debtlab::rng
