#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fgp/embed.hpp"
#include "fgp/rng.hpp"
#include "fgp/stationary.hpp"

namespace fgp {

enum class GeneratorKind { stationary_dense, stationary_spectral, pintore_ns };

inline std::string generator_name(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::stationary_dense: return "stationary_dense";
        case GeneratorKind::stationary_spectral: return "stationary_spectral";
        case GeneratorKind::pintore_ns: return "pintore_ns";
    }
    throw std::logic_error("unknown generator");
}

inline GeneratorKind generator_from_name(const std::string& s) {
    if (s == "stationary_dense") return GeneratorKind::stationary_dense;
    if (s == "stationary_spectral") return GeneratorKind::stationary_spectral;
    if (s == "pintore_ns") return GeneratorKind::pintore_ns;
    throw std::invalid_argument("unknown generator kind: " + s);
}

struct SimSpec {
    GeneratorKind kind = GeneratorKind::stationary_dense;
    std::vector<double> lo{0.0, 0.0};
    std::vector<double> hi{100.0, 100.0};
    std::size_t count = 900;
    SpectralModel model;      // kernel, scale and nugget of the latent field
    double nu2 = 0.0;         // observation-noise variance added on top
    std::uint64_t seed = 1;
    bool snap_to_grid = false;                 // distinct integer sites
    std::vector<std::size_t> lattice_shape;    // spectral path; empty = unit spacing

    std::size_t dims() const { return lo.size(); }

    void validate() const {
        if (count == 0) throw std::invalid_argument("sim spec: count must be > 0");
        if (lo.size() != hi.size() || lo.empty())
            throw std::invalid_argument("sim spec: bad domain bounds");
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (!(hi[k] > lo[k])) throw std::invalid_argument("sim spec: degenerate bounds");
        if (!(nu2 >= 0.0)) throw std::invalid_argument("sim spec: nu2 must be >= 0");
        model.validate();
    }
};

inline void to_json(nlohmann::json& j, const SimSpec& s) {
    j = nlohmann::json{{"kind", generator_name(s.kind)},
                       {"lo", s.lo},
                       {"hi", s.hi},
                       {"count", s.count},
                       {"model", s.model},
                       {"nu2", s.nu2},
                       {"seed", s.seed},
                       {"snap_to_grid", s.snap_to_grid},
                       {"lattice_shape", s.lattice_shape}};
}

inline void from_json(const nlohmann::json& j, SimSpec& s) {
    s.kind = generator_from_name(j.at("kind").get<std::string>());
    s.lo = j.at("lo").get<std::vector<double>>();
    s.hi = j.at("hi").get<std::vector<double>>();
    s.count = j.at("count").get<std::size_t>();
    s.model = j.at("model").get<SpectralModel>();
    s.nu2 = j.value("nu2", 0.0);
    s.seed = j.value("seed", std::uint64_t{1});
    s.snap_to_grid = j.value("snap_to_grid", false);
    s.lattice_shape = j.value("lattice_shape", std::vector<std::size_t>{});
    s.validate();
}

namespace detail {

inline std::vector<std::vector<double>> draw_locations(const SimSpec& spec, Rng& rng) {
    const std::size_t d = spec.dims();
    std::vector<std::vector<double>> locs;
    if (!spec.snap_to_grid) {
        for (std::size_t i = 0; i < spec.count; ++i) {
            std::vector<double> x(d);
            for (std::size_t k = 0; k < d; ++k) x[k] = rng.uniform(spec.lo[k], spec.hi[k]);
            locs.push_back(std::move(x));
        }
        return locs;
    }
    // distinct integer sites inside the bounds
    std::vector<long> lo(d), n(d);
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) {
        lo[k] = static_cast<long>(std::ceil(spec.lo[k]));
        n[k] = static_cast<long>(std::floor(spec.hi[k])) - lo[k] + 1;
        if (n[k] <= 0) throw std::invalid_argument("sim spec: no integer sites inside the bounds");
        total *= static_cast<std::size_t>(n[k]);
    }
    if (spec.count > total) throw std::invalid_argument("sim spec: more points than integer sites");
    // partial Fisher-Yates over the site indices
    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    for (std::size_t i = 0; i < spec.count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(total - i));
        std::swap(idx[i], idx[std::min(j, total - 1)]);
        std::vector<double> x(d);
        std::size_t rem = idx[i];
        for (std::size_t k = d; k-- > 0;) {
            x[k] = static_cast<double>(lo[k] + static_cast<long>(rem % static_cast<std::size_t>(n[k])));
            rem /= static_cast<std::size_t>(n[k]);
        }
        locs.push_back(std::move(x));
    }
    return locs;
}

inline ObservationSet dense_gaussian_draw(const std::vector<std::vector<double>>& locs,
                                          const Eigen::MatrixXd& cov, double nu2, Rng& rng) {
    const std::size_t n = locs.size();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("simulate: covariance Cholesky failed (size " + std::to_string(n) +
                                 ", min diag " + std::to_string(cov.diagonal().minCoeff()) + ")");
    Eigen::VectorXd eps(n);
    for (std::size_t i = 0; i < n; ++i) eps(static_cast<Eigen::Index>(i)) = rng.normal();
    Eigen::VectorXd z = llt.matrixL() * eps;

    ObservationSet obs;
    obs.dims = locs.front().size();
    const double nu_sd = std::sqrt(nu2);
    for (std::size_t i = 0; i < n; ++i) {
        for (double c : locs[i]) obs.coords.push_back(c);
        obs.values.push_back(z(static_cast<Eigen::Index>(i)) + (nu2 > 0 ? rng.normal(0.0, nu_sd) : 0.0));
    }
    return obs;
}

}  // namespace detail

/// Stationary generator.  The dense path draws from the closed-form
/// covariance plus nugget by Cholesky (guard 5000 points); the spectral path
/// draws a half-spectrum Y on the embedding lattice and projects it to the
/// requested locations.
inline ObservationSet simulate_stationary(const SimSpec& spec, Rng& rng) {
    spec.validate();
    auto locs = detail::draw_locations(spec, rng);

    if (spec.kind == GeneratorKind::stationary_dense) {
        if (spec.count > 5000) throw std::invalid_argument("simulate: dense path limited to 5000 points");
        const std::size_t n = locs.size();
        Eigen::MatrixXd cov(n, n);
        std::vector<double> lag(spec.dims());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                for (std::size_t k = 0; k < spec.dims(); ++k) lag[k] = locs[i][k] - locs[j][k];
                double v = spec.model.covariance(lag);
                if (i == j) v += spec.model.sigma2;
                cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            }
        return detail::dense_gaussian_draw(locs, cov, spec.nu2, rng);
    }
    if (spec.kind != GeneratorKind::stationary_spectral)
        throw std::invalid_argument("simulate_stationary: wrong generator kind");

    // lattice covering the domain; unit spacing unless a shape is given
    std::vector<std::size_t> shape = spec.lattice_shape;
    if (shape.empty()) {
        shape.resize(spec.dims());
        for (std::size_t k = 0; k < spec.dims(); ++k)
            shape[k] = static_cast<std::size_t>(std::ceil(spec.hi[k] - spec.lo[k])) + 1;
    }
    std::vector<double> h(spec.dims());
    SpectralModel lattice_model = spec.model;
    for (std::size_t k = 0; k < spec.dims(); ++k) {
        h[k] = (spec.hi[k] - spec.lo[k]) / static_cast<double>(shape[k] - 1);
        if (lattice_model.rho.size() == spec.dims())
            lattice_model.rho[k] = spec.model.range(k) / h[k];
    }
    if (lattice_model.rho.size() == 1) lattice_model.rho[0] = spec.model.rho[0] / h[0];

    auto lat = std::make_shared<FrequencyLattice>(shape, shape);
    auto support = full_spectrum(lattice_model, lat);
    const auto g = detail::eval_g(support, lattice_model);
    std::vector<double> unit(support.size(), 1.0);
    auto y = draw_fold_symmetric(support, unit, rng);
    SpectralVector coeffs(support.size());
    for (std::size_t p = 0; p < support.size(); ++p) coeffs[p] = std::sqrt(g[p]) * y[p];

    OffsiteProjector proj(support);
    ObservationSet obs;
    obs.dims = spec.dims();
    const double nugget_sd = std::sqrt(spec.model.sigma2);
    const double nu_sd = std::sqrt(spec.nu2);
    std::vector<double> u(spec.dims());
    for (const auto& x : locs) {
        for (std::size_t k = 0; k < spec.dims(); ++k) u[k] = (x[k] - spec.lo[k]) / h[k] + 1.0;
        double z = proj.project(coeffs, u);
        if (spec.model.sigma2 > 0) z += rng.normal(0.0, nugget_sd);
        if (spec.nu2 > 0) z += rng.normal(0.0, nu_sd);
        for (double c : x) obs.coords.push_back(c);
        obs.values.push_back(z);
    }
    return obs;
}

/// The reference non-stationary range surface over (0,100)^2.
inline double pintore_rho(double s1, double s2) {
    return (std::cos(4.0 * std::numbers::pi * s1 / 100.0) + 2.0) * std::exp(s2 / 200.0);
}

struct PintoreData {
    ObservationSet obs;
    std::vector<double> rho_at_obs;
};

/// Locally stationary squared-exponential generator:
///   C(s1,s2) = phi h exp(-||s1-s2||^2 / alpha),  alpha(s) = 2 rho(s)^2,
/// with the mean of the local alphas and the normalizing h factor.
inline PintoreData simulate_pintore_ns(const SimSpec& spec, Rng& rng) {
    spec.validate();
    if (spec.dims() != 2) throw std::invalid_argument("pintore generator is two-dimensional");
    if (spec.count > 5000) throw std::invalid_argument("simulate: dense path limited to 5000 points");
    auto locs = detail::draw_locations(spec, rng);

    const std::size_t n = locs.size();
    std::vector<double> alpha(n);
    PintoreData out;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = pintore_rho(locs[i][0], locs[i][1]);
        alpha[i] = 2.0 * r * r;
        out.rho_at_obs.push_back(r);
    }
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double am = 0.5 * (alpha[i] + alpha[j]);
            const double hij = 2.0 * std::sqrt(alpha[i]) * std::sqrt(alpha[j]) / (alpha[i] + alpha[j]);
            const double dx = locs[i][0] - locs[j][0];
            const double dy = locs[i][1] - locs[j][1];
            double v = spec.model.phi * hij * std::exp(-(dx * dx + dy * dy) / am);
            if (i == j) v += spec.model.sigma2;
            cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    out.obs = detail::dense_gaussian_draw(locs, cov, spec.nu2, rng);
    return out;
}

}  // namespace fgp
