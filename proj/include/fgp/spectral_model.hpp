#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace fgp {

enum class Family { matern, squared_exponential, separable_product };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::matern: return "matern";
        case Family::squared_exponential: return "squared_exponential";
        case Family::separable_product: return "separable_product";
    }
    throw std::logic_error("unknown family");
}

inline Family family_from_name(const std::string& s) {
    if (s == "matern") return Family::matern;
    if (s == "squared_exponential") return Family::squared_exponential;
    if (s == "separable_product") return Family::separable_product;
    throw std::invalid_argument("unknown covariance family: " + s);
}

/// A stationary covariance family with scale phi, range(s) rho, Matern
/// smoothness kappa and nugget sigma2.  Evaluable as a spectral density
/// g(omega) and, for these families, as a closed-form covariance C(x).
///
/// phi = 0 and sigma2 = 0 are accepted here so degenerate cases can be
/// exercised by oracles and simulators; samplers validate strict positivity
/// at their own entry points.
struct SpectralModel {
    Family family = Family::matern;
    double phi = 1.0;
    std::vector<double> rho{1.0};
    double kappa = 1.5;   // Matern only, held fixed
    double sigma2 = 1.0;
    double eps_rel = 0.01;

    void validate() const {
        if (!(phi >= 0.0) || !std::isfinite(phi)) throw std::invalid_argument("spectral model: phi must be >= 0");
        if (rho.empty()) throw std::invalid_argument("spectral model: empty rho");
        for (double r : rho)
            if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("spectral model: rho must be > 0");
        if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("spectral model: sigma2 must be >= 0");
        if (family == Family::matern && !(kappa > 0.0)) throw std::invalid_argument("spectral model: kappa must be > 0");
        if (!(eps_rel >= 0.0)) throw std::invalid_argument("spectral model: eps_rel must be >= 0");
    }

    double range(std::size_t k) const { return rho.size() == 1 ? rho[0] : rho.at(k); }

    /// Spectral density with the convention g(w) = \int exp(-i x.w) C(x) dx.
    double spectral_density(std::span<const double> omega) const {
        const std::size_t d = omega.size();
        for (double w : omega)
            if (!std::isfinite(w)) throw std::invalid_argument("spectral density: non-finite frequency");
        switch (family) {
            case Family::matern: {
                const double r = rho[0];
                double w2 = 0.0;
                for (double w : omega) w2 += w * w;
                const double dd = static_cast<double>(d);
                const double c = phi * std::pow(2.0, dd) * std::pow(std::numbers::pi, dd / 2.0) *
                                 std::tgamma(kappa + dd / 2.0) /
                                 (std::tgamma(kappa) * std::pow(r, 2.0 * kappa));
                return c * std::pow(1.0 / (r * r) + w2, -(kappa + dd / 2.0));
            }
            case Family::squared_exponential: {
                const double r = rho[0];
                double w2 = 0.0;
                for (double w : omega) w2 += w * w;
                const double dd = static_cast<double>(d);
                return phi * std::pow(2.0 * std::numbers::pi, dd / 2.0) * std::pow(r, dd) *
                       std::exp(-r * r * w2 / 2.0);
            }
            case Family::separable_product: {
                double g = phi;
                for (std::size_t k = 0; k < d; ++k) {
                    const double r = range(k);
                    g *= std::sqrt(2.0 * std::numbers::pi) * r * std::exp(-r * r * omega[k] * omega[k] / 2.0);
                }
                return g;
            }
        }
        throw std::logic_error("unreachable");
    }

    /// Closed-form covariance C(x) (without the nugget).
    double covariance(std::span<const double> lag) const {
        switch (family) {
            case Family::matern: {
                double r2 = 0.0;
                for (double x : lag) r2 += x * x;
                const double u = std::sqrt(r2) / rho[0];
                if (u == 0.0) return phi;
                return phi * std::pow(2.0, 1.0 - kappa) / std::tgamma(kappa) * std::pow(u, kappa) *
                       std::cyl_bessel_k(kappa, u);
            }
            case Family::squared_exponential: {
                double r2 = 0.0;
                for (double x : lag) r2 += x * x;
                return phi * std::exp(-r2 / (2.0 * rho[0] * rho[0]));
            }
            case Family::separable_product: {
                double q = 0.0;
                for (std::size_t k = 0; k < lag.size(); ++k) {
                    const double r = range(k);
                    q += lag[k] * lag[k] / (2.0 * r * r);
                }
                return phi * std::exp(-q);
            }
        }
        throw std::logic_error("unreachable");
    }
};

inline void to_json(nlohmann::json& j, const SpectralModel& m) {
    j = nlohmann::json{{"family", family_name(m.family)},
                       {"phi", m.phi},
                       {"rho", m.rho},
                       {"kappa", m.kappa},
                       {"sigma2", m.sigma2},
                       {"eps_rel", m.eps_rel}};
}

inline void from_json(const nlohmann::json& j, SpectralModel& m) {
    m.family = family_from_name(j.at("family").get<std::string>());
    m.phi = j.at("phi").get<double>();
    if (j.at("rho").is_array())
        m.rho = j.at("rho").get<std::vector<double>>();
    else
        m.rho = {j.at("rho").get<double>()};
    m.kappa = j.value("kappa", 1.5);
    m.sigma2 = j.at("sigma2").get<double>();
    m.eps_rel = j.value("eps_rel", 0.01);
    m.validate();
}

}  // namespace fgp
