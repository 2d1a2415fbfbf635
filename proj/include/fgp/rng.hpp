#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fgp {

/// Deterministic random source.  All variate algorithms are implemented
/// here (not delegated to std:: distributions) so that a seed fixes the
/// stream bit-for-bit across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    /// Derive an independent stream (chains, replicates).
    Rng fork(std::uint64_t index) const {
        std::uint64_t s = seed_mix_ ^ (0x9e3779b97f4a7c15ULL * (index + 1));
        Rng r(s);
        return r;
    }

    std::uint64_t raw() { return eng_(); }

    /// U(0,1), open at both ends.
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (no state carried between calls).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Gamma(shape, scale) via Marsaglia-Tsang, with the u^(1/a) boost for
    /// shape < 1.
    double gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0)) throw std::invalid_argument("gamma: shape and scale must be > 0");
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    /// Inverse-Gamma(shape, rate): 1/X with X ~ Gamma(shape, 1/rate).
    double inverse_gamma(double shape, double rate) {
        return 1.0 / gamma(shape, 1.0 / rate);
    }

    /// N(mean, sd) conditioned on x >= lower (Robert 1995 for far tails).
    double truncated_normal_lower(double mean, double sd, double lower) {
        const double a = (lower - mean) / sd;
        if (a < 0.45) {  // rejection from the plain normal is cheap here
            for (;;) {
                const double z = normal();
                if (z >= a) return mean + sd * z;
            }
        }
        const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
        for (;;) {
            const double z = a - std::log(uniform()) / alpha;  // shifted exponential
            const double d = z - alpha;
            if (std::log(uniform()) <= -0.5 * d * d) return mean + sd * z;
        }
    }

    /// N(mean, sd) conditioned on x < upper.
    double truncated_normal_upper(double mean, double sd, double upper) {
        return -truncated_normal_lower(-mean, sd, -upper);
    }

private:
    std::mt19937_64 eng_;
    std::uint64_t seed_mix_ = init_mix();

    std::uint64_t init_mix() {
        // a fork base decorrelated from the main stream
        std::mt19937_64 copy = eng_;
        return copy() ^ 0xd1b54a32d192ed03ULL;
    }
};

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

}  // namespace fgp
