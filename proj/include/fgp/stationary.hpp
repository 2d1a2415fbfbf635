#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fgp/embed.hpp"
#include "fgp/likelihood.hpp"
#include "fgp/rng.hpp"
#include "fgp/spectral_diagonal.hpp"
#include "fgp/transform.hpp"

namespace fgp {

/// Priors for the covariance, noise and misalignment parameters.
struct PriorSet {
    Prior phi = Prior::inv_gamma(0.1, 0.1);
    Prior rho = Prior::uniform(0.0, 1000.0);
    Prior sigma2 = Prior::inv_gamma(0.1, 0.1);
    Prior nu2 = Prior::inv_gamma(0.1, 0.1);
    Prior kappa_mis = Prior::uniform(0.0, 1000.0);
    Prior weight_phi = Prior::inv_gamma(0.1, 0.1);
    Prior weight_rho = Prior::uniform(0.0, 1000.0);
};

inline void to_json(nlohmann::json& j, const PriorSet& p) {
    j = nlohmann::json{{"phi", p.phi},           {"rho", p.rho},
                       {"sigma2", p.sigma2},     {"nu2", p.nu2},
                       {"kappa_mis", p.kappa_mis}, {"weight_phi", p.weight_phi},
                       {"weight_rho", p.weight_rho}};
}

inline void from_json(const nlohmann::json& j, PriorSet& p) {
    if (j.contains("phi")) p.phi = j.at("phi").get<Prior>();
    if (j.contains("rho")) p.rho = j.at("rho").get<Prior>();
    if (j.contains("sigma2")) p.sigma2 = j.at("sigma2").get<Prior>();
    if (j.contains("nu2")) p.nu2 = j.at("nu2").get<Prior>();
    if (j.contains("kappa_mis")) p.kappa_mis = j.at("kappa_mis").get<Prior>();
    if (j.contains("weight_phi")) p.weight_phi = j.at("weight_phi").get<Prior>();
    if (j.contains("weight_rho")) p.weight_rho = j.at("weight_rho").get<Prior>();
}

struct McmcConfig {
    std::size_t steps = 3000;
    std::size_t burn_in = 1000;
    std::size_t thin = 5;
    std::size_t chains = 1;
    std::uint64_t seed = 1;
    double adapt_target = 0.3;
    bool adapt = true;
    std::size_t theta_proposals = 3;  // Metropolis proposals per sweep (cached transform)
    std::size_t k_init = 16;         // mixture only
    std::size_t k_max = 32;          // mixture only
    std::size_t freeze_after = 500;  // mixture only; 0 disables freezing

    void validate() const {
        if (steps == 0) throw std::invalid_argument("mcmc config: steps must be > 0");
        if (burn_in >= steps) throw std::invalid_argument("mcmc config: burn_in must be < steps");
        if (thin == 0) throw std::invalid_argument("mcmc config: thin must be >= 1");
        if (chains == 0) throw std::invalid_argument("mcmc config: chains must be >= 1");
        if (theta_proposals == 0) throw std::invalid_argument("mcmc config: theta_proposals must be >= 1");
        if (k_init == 0 || k_init > k_max) throw std::invalid_argument("mcmc config: need 1 <= k_init <= k_max");
    }
};

inline void to_json(nlohmann::json& j, const McmcConfig& c) {
    j = nlohmann::json{{"steps", c.steps},   {"burn_in", c.burn_in}, {"thin", c.thin},
                       {"chains", c.chains}, {"seed", c.seed},       {"adapt_target", c.adapt_target},
                       {"adapt", c.adapt},   {"theta_proposals", c.theta_proposals},
                       {"k_init", c.k_init}, {"k_max", c.k_max},
                       {"freeze_after", c.freeze_after}};
}

inline void from_json(const nlohmann::json& j, McmcConfig& c) {
    c.steps = j.value("steps", c.steps);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.thin = j.value("thin", c.thin);
    c.chains = j.value("chains", c.chains);
    c.seed = j.value("seed", c.seed);
    c.adapt_target = j.value("adapt_target", c.adapt_target);
    c.adapt = j.value("adapt", c.adapt);
    c.theta_proposals = j.value("theta_proposals", c.theta_proposals);
    c.k_init = j.value("k_init", c.k_init);
    c.k_max = j.value("k_max", c.k_max);
    c.freeze_after = j.value("freeze_after", c.freeze_after);
    c.validate();
}

struct NoiseConfig {
    bool sample_nu2 = true;
    double nu2_init = 0.1;
    bool sample_kappa_mis = false;
    double kappa_mis_init = 0.0;
};

inline void to_json(nlohmann::json& j, const NoiseConfig& c) {
    j = nlohmann::json{{"sample_nu2", c.sample_nu2},
                       {"nu2_init", c.nu2_init},
                       {"sample_kappa_mis", c.sample_kappa_mis},
                       {"kappa_mis_init", c.kappa_mis_init}};
}

inline void from_json(const nlohmann::json& j, NoiseConfig& c) {
    c.sample_nu2 = j.value("sample_nu2", c.sample_nu2);
    c.nu2_init = j.value("nu2_init", c.nu2_init);
    c.sample_kappa_mis = j.value("sample_kappa_mis", c.sample_kappa_mis);
    c.kappa_mis_init = j.value("kappa_mis_init", c.kappa_mis_init);
}

/// One random-walk scale shared by a Metropolis block, Robbins-Monro tuned
/// toward the target acceptance rate and frozen after burn-in.
struct AdaptiveScale {
    double log_scale = std::log(0.2);
    double target = 0.3;
    bool frozen = false;
    std::size_t t = 0;
    std::size_t proposals = 0;
    std::size_t accepts = 0;

    double scale() const { return std::exp(log_scale); }

    void record(double accept_prob, bool accepted) {
        ++proposals;
        if (accepted) ++accepts;
        if (frozen) return;
        ++t;
        const double gamma = 1.0 / std::pow(static_cast<double>(t) + 1.0, 0.6);
        log_scale += gamma * (accept_prob - target);
        log_scale = std::clamp(log_scale, std::log(1e-4), std::log(10.0));
    }

    double acceptance_rate() const {
        return proposals == 0 ? 0.0 : static_cast<double>(accepts) / static_cast<double>(proposals);
    }
};

/// Gibbs state for the stationary model.  The invariant
/// mu = inverse_transform(G^{1/2} Y) holds after every sweep.
struct StationaryChainState {
    SpectralModel theta;
    LatticeField z;
    SpectralVector y;
    LatticeField mu;
    std::vector<double> g;  // g(omega_l; theta) over the active support
    double nu2 = 0.1;
    double kappa_mis = 0.0;
    std::size_t iter = 0;
};

namespace detail {

inline std::vector<double> eval_g(const SpectralDiagonal& support, const SpectralModel& model) {
    std::vector<double> g(support.size());
    std::vector<double> w(support.lattice->dims());
    for (std::size_t p = 0; p < support.size(); ++p) {
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = support.lattice->omega_component(support.active[p], k);
        g[p] = model.spectral_density(w);
    }
    return g;
}

inline bool any_nonfinite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return true;
    return false;
}

}  // namespace detail

/// Effective observation variance of observation i in the current state.
inline double obs_variance(const ObservationSet& obs, const EmbeddedData& data,
                           const StationaryChainState& st, std::size_t i) {
    const double nu2 = obs.noise_var.empty() ? st.nu2 : obs.noise_var[i];
    return inflated_noise_var(nu2, st.kappa_mis, data.distance[i]);
}

/// Metropolis update of (phi, rho.., sigma2[, kappa_mis]) against the
/// Whittle-marginal target p(Z | theta) p(theta), on log scale.  Uses the
/// cached transform, so each proposal costs O(m).
inline void update_theta_marginal(StationaryChainState& st, const WhittleCache& cache,
                                  const SpectralDiagonal& support, const ObservationSet& obs,
                                  const EmbeddedData& data, const PriorSet& priors,
                                  const NoiseConfig& noise, AdaptiveScale& scales, Rng& rng) {
    auto log_target = [&](const SpectralModel& m, double kappa_mis,
                          const std::vector<double>& g) -> double {
        double lp = priors.phi.log_density(m.phi) + priors.sigma2.log_density(m.sigma2);
        for (double r : m.rho) lp += priors.rho.log_density(r);
        if (noise.sample_kappa_mis) lp += priors.kappa_mis.log_density(kappa_mis);
        if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
        double ll = latent_log_density(cache, g, m.sigma2);
        if (noise.sample_kappa_mis) ll += observation_log_density(obs, data, st.z, st.nu2, kappa_mis);
        return ll + lp;
    };

    const std::size_t n_rho = st.theta.rho.size();
    const std::size_t dim = 2 + n_rho + (noise.sample_kappa_mis ? 1 : 0);

    SpectralModel prop = st.theta;
    const double s = scales.scale();
    double jac = 0.0;  // log Jacobian ratio of the log-scale walk
    prop.phi = st.theta.phi * std::exp(s * rng.normal());
    for (std::size_t k = 0; k < n_rho; ++k) prop.rho[k] = st.theta.rho[k] * std::exp(s * rng.normal());
    prop.sigma2 = st.theta.sigma2 * std::exp(s * rng.normal());
    jac += std::log(prop.phi / st.theta.phi) + std::log(prop.sigma2 / st.theta.sigma2);
    for (std::size_t k = 0; k < n_rho; ++k) jac += std::log(prop.rho[k] / st.theta.rho[k]);
    double prop_kappa = st.kappa_mis;
    if (noise.sample_kappa_mis) {
        const double base = std::max(st.kappa_mis, 1e-6);
        prop_kappa = base * std::exp(s * rng.normal());
        jac += std::log(prop_kappa / base);
    }
    (void)dim;

    double accept_prob = 0.0;
    bool accepted = false;
    try {
        std::vector<double> g_prop = detail::eval_g(support, prop);
        const double cur = log_target(st.theta, st.kappa_mis, st.g);
        const double nxt = log_target(prop, prop_kappa, g_prop);
        const double log_ratio = nxt - cur + jac;
        accept_prob = std::isfinite(log_ratio) ? std::min(1.0, std::exp(log_ratio)) : 0.0;
        if (rng.uniform() < accept_prob) {
            st.theta = prop;
            st.kappa_mis = prop_kappa;
            st.g = std::move(g_prop);
            accepted = true;
        }
    } catch (const std::exception&) {
        accept_prob = 0.0;  // invalid proposals reject, never abort the chain
    }
    scales.record(accept_prob, accepted);
}

/// Y | Z ~ CN(G^{1/2}(G + I s2)^{-1} Q*Z, s2 (G + I s2)^{-1}), drawn on a
/// half spectrum and mirrored; self-paired coordinates are real.
inline void draw_y_given_z(StationaryChainState& st, const WhittleCache& cache,
                           const SpectralDiagonal& support, Rng& rng) {
    const double s2 = st.theta.sigma2;
    st.y.assign(support.size(), {0.0, 0.0});
    for (std::size_t p = 0; p < support.size(); ++p) {
        const std::size_t mate = support.partner[p];
        if (mate < p) continue;  // mirrored from the representative
        const double g = st.g[p];
        const double shrink = std::sqrt(g) / (g + s2);
        const std::complex<double> mean = shrink * cache.coeffs[p];
        const double var = s2 / (g + s2);
        if (mate == p) {
            st.y[p] = {rng.normal(mean.real(), std::sqrt(var)), 0.0};
        } else {
            const double sd = std::sqrt(var / 2.0);
            st.y[p] = {rng.normal(mean.real(), sd), rng.normal(mean.imag(), sd)};
            st.y[mate] = std::conj(st.y[p]);
        }
    }
}

/// Fold-symmetric spectral draw with per-coordinate variance var[p]
/// (E|c_p|^2 = var[p]); self-paired coordinates are real.
inline SpectralVector draw_fold_symmetric(const SpectralDiagonal& support,
                                          const std::vector<double>& var, Rng& rng) {
    SpectralVector c(support.size(), {0.0, 0.0});
    for (std::size_t p = 0; p < support.size(); ++p) {
        const std::size_t mate = support.partner[p];
        if (mate < p) continue;
        if (mate == p) {
            c[p] = {rng.normal(0.0, std::sqrt(var[p])), 0.0};
        } else {
            const double sd = std::sqrt(var[p] / 2.0);
            c[p] = {rng.normal(0.0, sd), rng.normal(0.0, sd)};
            c[mate] = std::conj(c[p]);
        }
    }
    return c;
}

/// Prior draw of the lattice field: Q G^{1/2} Y plus the nugget.
inline LatticeField draw_prior_field(const SpectralDiagonal& support, const std::vector<double>& g,
                                     double sigma2, Rng& rng) {
    std::vector<double> unit(support.size(), 1.0);
    SpectralVector y = draw_fold_symmetric(support, unit, rng);
    for (std::size_t p = 0; p < support.size(); ++p) y[p] *= std::sqrt(g[p]);
    LatticeField f = inverse_transform(y, support);
    const double sd = std::sqrt(sigma2);
    for (auto& v : f.values) v += rng.normal(0.0, sd);
    return f;
}

/// mu = Q G^{1/2} Y via the inverse transform.
inline void compute_mu(StationaryChainState& st, const SpectralDiagonal& support) {
    SpectralVector coeffs(support.size());
    for (std::size_t p = 0; p < support.size(); ++p) coeffs[p] = std::sqrt(st.g[p]) * st.y[p];
    st.mu = inverse_transform(coeffs, support);
}

/// Z draws: precision-weighted at observed cells (summing over the cell's
/// observation list), prior N(mu, sigma2) elsewhere.
inline void draw_z(StationaryChainState& st, const ObservationSet& obs, const EmbeddedData& data,
                   Rng& rng) {
    const double s2 = st.theta.sigma2;
    const double sd = std::sqrt(s2);
    std::vector<double> extra_prec(data.observed_cells.size(), 0.0);
    std::vector<double> extra_mean(data.observed_cells.size(), 0.0);
    for (std::size_t c = 0; c < data.observed_cells.size(); ++c) {
        for (std::size_t i : data.cell_obs[c]) {
            const double lam = obs_variance(obs, data, st, i);
            extra_prec[c] += 1.0 / lam;
            extra_mean[c] += obs.values[i] / lam;
        }
    }
    std::size_t c = 0;
    for (std::size_t cell = 0; cell < st.z.size(); ++cell) {
        if (c < data.observed_cells.size() && data.observed_cells[c] == cell) {
            const double prec = 1.0 / s2 + extra_prec[c];
            const double mean = (st.mu.values[cell] / s2 + extra_mean[c]) / prec;
            st.z.values[cell] = rng.normal(mean, std::sqrt(1.0 / prec));
            ++c;
        } else {
            st.z.values[cell] = rng.normal(st.mu.values[cell], sd);
        }
    }
}

/// Conjugate inverse-gamma update of the shared nu^2.
inline void update_nu2(StationaryChainState& st, const ObservationSet& obs, const EmbeddedData& data,
                       const PriorSet& priors, Rng& rng) {
    if (!obs.noise_var.empty()) return;  // per-observation variances are fixed inputs
    double shape = priors.nu2.a;
    double rate = priors.nu2.b;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double r = obs.values[i] - st.z.values[data.cell_of_obs[i]];
        const double inflate = 1.0 + st.kappa_mis * data.distance[i];
        shape += 0.5;
        rate += 0.5 * r * r / inflate;
    }
    st.nu2 = rng.inverse_gamma(shape, rate);
}

/// One full Gibbs sweep.  Order: theta | Z (marginal, so Y is refreshed
/// immediately after), Y | Z, mu, Z | mu and data, then the noise layer.
inline void stationary_sweep(StationaryChainState& st, const ObservationSet& obs,
                             const EmbeddedData& data, const SpectralDiagonal& support,
                             const PriorSet& priors, const NoiseConfig& noise,
                             AdaptiveScale& scales, Rng& rng, std::size_t theta_proposals = 1) {
    WhittleCache cache(st.z, support);
    for (std::size_t t = 0; t < theta_proposals; ++t)
        update_theta_marginal(st, cache, support, obs, data, priors, noise, scales, rng);
    draw_y_given_z(st, cache, support, rng);
    compute_mu(st, support);
    draw_z(st, obs, data, rng);
    if (noise.sample_nu2) update_nu2(st, obs, data, priors, rng);
    ++st.iter;
}

/// Deterministic warm start: observed cell means for Z, the configured model
/// for theta, Y from its full conditional.
inline StationaryChainState init_state(const SpectralModel& theta0, const ObservationSet& obs,
                                       const EmbeddedData& data, const SpectralDiagonal& support,
                                       const NoiseConfig& noise, Rng& rng) {
    StationaryChainState st;
    st.theta = theta0;
    st.theta.validate();
    if (!(st.theta.sigma2 > 0.0) || !(st.theta.phi > 0.0))
        throw std::invalid_argument("stationary fit: phi and sigma2 must be > 0");
    st.nu2 = noise.nu2_init;
    if (!(st.nu2 > 0.0)) throw std::invalid_argument("stationary fit: nu2 must be > 0");
    st.kappa_mis = noise.kappa_mis_init;
    st.z = LatticeField(data.shape);
    for (std::size_t c = 0; c < data.observed_cells.size(); ++c) {
        double mean = 0.0;
        for (std::size_t i : data.cell_obs[c]) mean += obs.values[i];
        st.z.values[data.observed_cells[c]] = mean / static_cast<double>(data.cell_obs[c].size());
    }
    st.g = detail::eval_g(support, st.theta);
    WhittleCache cache(st.z, support);
    draw_y_given_z(st, cache, support, rng);
    compute_mu(st, support);
    return st;
}

/// Retained draws of one chain.
struct ChainDraws {
    std::vector<std::string> param_names;
    std::vector<std::size_t> iteration;
    std::vector<std::vector<double>> rows;   // aligned with param_names
    std::vector<double> loglik;
    std::vector<SpectralModel> models;       // per retained draw
    std::vector<double> nu2;
    std::vector<double> kappa_mis;
    std::vector<SpectralVector> y_draws;
    double acceptance_rate = 0.0;
};

struct PosteriorSummary {
    std::vector<std::string> param_names;
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<ChainDraws> chains;
    std::size_t retained_per_chain = 0;

    std::size_t param_index(const std::string& name) const {
        for (std::size_t i = 0; i < param_names.size(); ++i)
            if (param_names[i] == name) return i;
        throw std::invalid_argument("unknown parameter: " + name);
    }
};

namespace detail {

inline std::vector<std::string> stationary_param_names(const SpectralModel& m, const NoiseConfig& noise) {
    std::vector<std::string> names{"phi"};
    if (m.rho.size() == 1)
        names.push_back("rho");
    else
        for (std::size_t k = 0; k < m.rho.size(); ++k) names.push_back("rho" + std::to_string(k + 1));
    names.push_back("sigma2");
    names.push_back("nu2");
    if (noise.sample_kappa_mis) names.push_back("kappa_mis");
    return names;
}

inline void summarize(PosteriorSummary& out) {
    const std::size_t np = out.param_names.size();
    out.mean.assign(np, 0.0);
    out.sd.assign(np, 0.0);
    std::size_t total = 0;
    for (const auto& ch : out.chains) total += ch.rows.size();
    if (total == 0) return;
    for (const auto& ch : out.chains)
        for (const auto& row : ch.rows)
            for (std::size_t p = 0; p < np; ++p) out.mean[p] += row[p];
    for (std::size_t p = 0; p < np; ++p) out.mean[p] /= static_cast<double>(total);
    for (const auto& ch : out.chains)
        for (const auto& row : ch.rows)
            for (std::size_t p = 0; p < np; ++p) {
                const double d = row[p] - out.mean[p];
                out.sd[p] += d * d;
            }
    for (std::size_t p = 0; p < np; ++p)
        out.sd[p] = total > 1 ? std::sqrt(out.sd[p] / static_cast<double>(total - 1)) : 0.0;
}

}  // namespace detail

/// Runs the stationary sampler: embedding is done by the caller; chains use
/// independent streams forked from the master seed and may run in parallel.
inline PosteriorSummary fit_stationary(const ObservationSet& obs, const EmbeddedData& data,
                                       const SpectralDiagonal& support, const SpectralModel& theta0,
                                       const McmcConfig& mcmc, const PriorSet& priors,
                                       const NoiseConfig& noise) {
    mcmc.validate();
    PosteriorSummary out;
    out.param_names = detail::stationary_param_names(theta0, noise);
    out.chains.resize(mcmc.chains);

    Rng master(mcmc.seed);
    auto run_chain = [&](std::size_t ci) {
        Rng rng = master.fork(ci);
        ChainDraws& draws = out.chains[ci];
        draws.param_names = out.param_names;
        AdaptiveScale scales;
        scales.target = mcmc.adapt_target;
        scales.frozen = !mcmc.adapt;
        StationaryChainState st = init_state(theta0, obs, data, support, noise, rng);
        for (std::size_t step = 1; step <= mcmc.steps; ++step) {
            if (step == mcmc.burn_in + 1) scales.frozen = true;
            stationary_sweep(st, obs, data, support, priors, noise, scales, rng, mcmc.theta_proposals);
            if (detail::any_nonfinite(st.z.values) || !std::isfinite(st.theta.phi))
                throw std::runtime_error("stationary fit: divergent state at iteration " +
                                         std::to_string(step) + " (phi=" + std::to_string(st.theta.phi) +
                                         ", nu2=" + std::to_string(st.nu2) + ")");
            if (step > mcmc.burn_in && (step - mcmc.burn_in) % mcmc.thin == 0) {
                std::vector<double> row;
                row.push_back(st.theta.phi);
                for (double r : st.theta.rho) row.push_back(r);
                row.push_back(st.theta.sigma2);
                row.push_back(st.nu2);
                if (noise.sample_kappa_mis) row.push_back(st.kappa_mis);
                draws.rows.push_back(std::move(row));
                draws.iteration.push_back(step);
                WhittleCache cache(st.z, support);
                draws.loglik.push_back(latent_log_density(cache, st.g, st.theta.sigma2) +
                                       observation_log_density(obs, data, st.z, st.nu2, st.kappa_mis));
                draws.models.push_back(st.theta);
                draws.nu2.push_back(st.nu2);
                draws.kappa_mis.push_back(st.kappa_mis);
                draws.y_draws.push_back(st.y);
            }
        }
        draws.acceptance_rate = scales.acceptance_rate();
    };

    if (mcmc.chains == 1) {
        run_chain(0);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(mcmc.chains);
        for (std::size_t ci = 0; ci < mcmc.chains; ++ci)
            workers.emplace_back([&, ci] {
                try {
                    run_chain(ci);
                } catch (...) {
                    errors[ci] = std::current_exception();
                }
            });
        for (auto& w : workers) w.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    out.retained_per_chain = out.chains.front().rows.size();
    detail::summarize(out);
    return out;
}

struct Prediction {
    std::vector<double> mean;
    std::vector<double> variance;
};

/// Spectral Kriging: per retained draw the predictive law at a target is
/// N(Q_s G^{1/2} Y, nu2 + sigma2); draws are aggregated by the law of total
/// variance.  Targets are in lattice units.
inline Prediction predict_stationary(const PosteriorSummary& fit, const SpectralDiagonal& support,
                                     const std::vector<std::vector<double>>& targets) {
    std::size_t total = 0;
    for (const auto& ch : fit.chains) total += ch.y_draws.size();
    if (total == 0) throw std::invalid_argument("predict: no retained draws");

    const std::size_t nt = targets.size();
    Prediction out;
    out.mean.assign(nt, 0.0);
    out.variance.assign(nt, 0.0);
    std::vector<double> mean_sq(nt, 0.0);

    OffsiteProjector proj(support);
    SpectralVector coeffs(support.size());
    for (const auto& ch : fit.chains) {
        for (std::size_t dr = 0; dr < ch.y_draws.size(); ++dr) {
            const auto g = detail::eval_g(support, ch.models[dr]);
            for (std::size_t p = 0; p < support.size(); ++p)
                coeffs[p] = std::sqrt(g[p]) * ch.y_draws[dr][p];
            const double noise = ch.nu2[dr] + ch.models[dr].sigma2;
            for (std::size_t t = 0; t < nt; ++t) {
                const double m = proj.project(coeffs, targets[t]);
                out.mean[t] += m;
                mean_sq[t] += m * m;
                out.variance[t] += noise;
            }
        }
    }
    const double dn = static_cast<double>(total);
    for (std::size_t t = 0; t < nt; ++t) {
        out.mean[t] /= dn;
        const double between = std::max(0.0, mean_sq[t] / dn - out.mean[t] * out.mean[t]);
        out.variance[t] = out.variance[t] / dn + between;
    }
    return out;
}

}  // namespace fgp
