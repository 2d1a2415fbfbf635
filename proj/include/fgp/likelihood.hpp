#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgp/embed.hpp"
#include "fgp/spectral_diagonal.hpp"
#include "fgp/transform.hpp"

namespace fgp {

constexpr double kLog2Pi = 1.8378770664093454836;

/// Prior over a positive scalar parameter.
struct Prior {
    enum class Type { uniform, inverse_gamma } type = Type::uniform;
    double a = 0.0;   // lower bound / shape
    double b = 1000.0;  // upper bound / rate

    double log_density(double x) const {
        switch (type) {
            case Type::uniform:
                if (x <= a || x >= b) return -std::numeric_limits<double>::infinity();
                return -std::log(b - a);
            case Type::inverse_gamma:
                if (x <= 0.0) return -std::numeric_limits<double>::infinity();
                return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
        }
        return 0.0;
    }

    template <typename RngT>
    double draw(RngT& rng) const {
        switch (type) {
            case Type::uniform: return rng.uniform(a, b);
            case Type::inverse_gamma: return rng.inverse_gamma(a, b);
        }
        return 0.0;
    }

    double median() const {
        switch (type) {
            case Type::uniform: return 0.5 * (a + b);
            case Type::inverse_gamma: {
                // bisection on the regularized upper gamma tail
                double lo = 1e-8, hi = 1e8;
                for (int it = 0; it < 200; ++it) {
                    double mid = std::sqrt(lo * hi);
                    // P(X <= mid) for X ~ IG(a,b) equals Q(a, b/mid)
                    double p = 1.0;
                    {
                        // series/continued-fraction free approximation via
                        // normalized incomplete gamma by simple quadrature
                        const int steps = 2000;
                        const double upper = b / mid;
                        double acc = 0.0;
                        for (int i = 0; i < steps; ++i) {
                            double t = upper * (i + 0.5) / steps;
                            acc += std::exp((a - 1.0) * std::log(t) - t);
                        }
                        acc *= upper / steps;
                        p = 1.0 - acc / std::tgamma(a);
                    }
                    if (p > 0.5)
                        hi = mid;
                    else
                        lo = mid;
                }
                return std::sqrt(lo * hi);
            }
        }
        return 0.0;
    }

    static Prior uniform(double a, double b) { return {Type::uniform, a, b}; }
    static Prior inv_gamma(double shape, double rate) { return {Type::inverse_gamma, shape, rate}; }
};

inline void to_json(nlohmann::json& j, const Prior& p) {
    j = nlohmann::json{{"type", p.type == Prior::Type::uniform ? "uniform" : "inverse_gamma"},
                       {"a", p.a},
                       {"b", p.b}};
}

inline void from_json(const nlohmann::json& j, Prior& p) {
    const std::string t = j.at("type").get<std::string>();
    if (t == "uniform")
        p.type = Prior::Type::uniform;
    else if (t == "inverse_gamma")
        p.type = Prior::Type::inverse_gamma;
    else
        throw std::invalid_argument("unknown prior type: " + t);
    p.a = j.at("a").get<double>();
    p.b = j.at("b").get<double>();
}

/// Cached frequency-domain view of a lattice field.  Holding the transform
/// fixed while the covariance parameters move is what makes a likelihood
/// evaluation O(m) instead of O(n log2 n).
struct WhittleCache {
    SpectralVector coeffs;       // (Q*Z)_l over the active set
    std::vector<double> power;   // |(Q*Z)_l|^2
    double field_sq_norm = 0.0;  // ||Z||^2
    std::size_t n_total = 0;

    WhittleCache() = default;
    WhittleCache(const LatticeField& field, const SpectralDiagonal& diag) {
        coeffs = forward_transform(field, diag);
        power.resize(coeffs.size());
        for (std::size_t p = 0; p < coeffs.size(); ++p) power[p] = std::norm(coeffs[p]);
        field_sq_norm = 0.0;
        for (double v : field.values) field_sq_norm += v * v;
        n_total = diag.lattice->n_total();
    }
};

/// Exact log density of the lattice field under N(0, Q G Q* + I sigma2) with
/// the model's spectrum restricted to the active set: dropped frequencies
/// carry plain sigma2 terms, which enter through Parseval's identity rather
/// than an explicit sum.
inline double latent_log_density(const WhittleCache& cache, const std::vector<double>& g, double sigma2) {
    if (g.size() != cache.power.size())
        throw std::invalid_argument("latent_log_density: diagonal size mismatch");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("latent_log_density: sigma2 must be > 0");
    const std::size_t m = g.size();
    double quad = 0.0, logdet = 0.0, active_power = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
        const double lam = g[p] + sigma2;
        quad += cache.power[p] / lam;
        logdet += std::log(lam);
        active_power += cache.power[p];
    }
    const double n = static_cast<double>(cache.n_total);
    const double residual = std::max(0.0, cache.field_sq_norm - active_power);
    quad += residual / sigma2;
    logdet += (n - static_cast<double>(m)) * std::log(sigma2);
    return -0.5 * (quad + logdet + n * kLog2Pi);
}

/// As above, evaluating g(omega) from a model over the active frequencies.
inline double latent_log_density(const WhittleCache& cache, const SpectralDiagonal& diag,
                                 const SpectralModel& model) {
    std::vector<double> g(diag.size());
    std::vector<double> w(diag.lattice->dims());
    for (std::size_t p = 0; p < diag.size(); ++p) {
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = diag.lattice->omega_component(diag.active[p], k);
        g[p] = model.spectral_density(w);
    }
    return latent_log_density(cache, g, model.sigma2);
}

/// Observation-layer variance for one observation: nu^2 (1 + kappa_mis d).
inline double inflated_noise_var(double nu2, double kappa_mis, double distance) {
    return nu2 * (1.0 + kappa_mis * distance);
}

/// Gaussian observation layer: product over observations of
/// N(Zt_i; Z_(cell i), nu_i^2 (1 + kappa_mis d_i)).
inline double observation_log_density(const ObservationSet& obs, const EmbeddedData& data,
                                      const LatticeField& z, double shared_nu2, double kappa_mis) {
    double acc = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double nu2 = obs.noise_var.empty() ? shared_nu2 : obs.noise_var[i];
        const double lam = inflated_noise_var(nu2, kappa_mis, data.distance[i]);
        if (!(lam > 0.0)) throw std::invalid_argument("observation_log_density: non-positive variance");
        const double r = obs.values[i] - z.values[data.cell_of_obs[i]];
        acc += -0.5 * (r * r / lam + std::log(lam) + kLog2Pi);
    }
    return acc;
}

/// Full augmented log likelihood of (Z~, Z_S): Whittle-type latent layer
/// plus the independent observation layer.
inline double augmented_log_likelihood(const LatticeField& z, const SpectralModel& model,
                                       const SpectralDiagonal& diag, const ObservationSet& obs,
                                       const EmbeddedData& data, double shared_nu2,
                                       double kappa_mis = 0.0) {
    WhittleCache cache(z, diag);
    return latent_log_density(cache, diag, model) +
           observation_log_density(obs, data, z, shared_nu2, kappa_mis);
}

}  // namespace fgp
