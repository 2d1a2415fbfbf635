#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgp/stationary.hpp"

namespace fgp {

/// One mixture component: a mean-field spectral model (with its own scale
/// and nugget), a weight-field spectral model (unit nugget, fixed), and the
/// associated latent fields.
struct MixtureComponent {
    SpectralModel theta_z;
    SpectralModel theta_m;
    std::vector<double> g_z;
    std::vector<double> g_m;
    LatticeField z;
    LatticeField mu;
    LatticeField eta;
    SpectralVector zeta;      // spectral representation of eta
    SpectralVector z_coeffs;  // Q*Z_k, refreshed each sweep (cached when frozen)
    double z_sq_norm = 0.0;
    std::size_t last_visit = 0;
    bool frozen = false;
};

/// Slice-sampler state of the mixture: shared spectral vector, per-observed-
/// cell labels and slice variables, and the instantiated component bank.
struct MixtureState {
    SpectralVector y;
    std::vector<MixtureComponent> comps;
    std::vector<std::size_t> labels;  // per observed cell, aligned with data.observed_cells
    std::vector<double> slice;        // r_s per observed cell
    std::size_t k_max = 32;
    std::size_t iter = 0;

    std::size_t k_active() const { return comps.size(); }
};

namespace detail {

/// Stick weight p_k at one cell from the component probit fields.  The last
/// admissible component (index k_max-1) has its stick pinned at one, making
/// the truncation exact.
inline double stick_weight(const MixtureState& st, std::size_t cell, std::size_t k) {
    double stick = 1.0;
    for (std::size_t j = 0; j < k; ++j) stick *= 1.0 - norm_cdf(st.comps[j].eta.values[cell]);
    const double u = (k + 1 == st.k_max) ? 1.0 : norm_cdf(st.comps[k].eta.values[cell]);
    return stick * u;
}

inline double tail_mass(const MixtureState& st, std::size_t cell) {
    if (st.k_active() == st.k_max) return 0.0;
    double stick = 1.0;
    for (std::size_t j = 0; j < st.k_active(); ++j)
        stick *= 1.0 - norm_cdf(st.comps[j].eta.values[cell]);
    return stick;
}

}  // namespace detail

/// Non-stationary covariance of Eq.-(12) form.  With labels, the conditional
///   Cov = Q_{s1} G_{c1}^{1/2} G_{c2}^{1/2} Q*_{s2} + sigma_c1^2 1_{s1=s2};
/// with per-location weight vectors, the label-marginal double sum.
inline double ns_covariance(const std::vector<const SpectralModel*>& models,
                            const std::vector<const std::vector<double>*>& g_diags,
                            const SpectralDiagonal& support, std::span<const double> s1,
                            std::span<const double> s2, std::size_t label1, std::size_t label2) {
    if (label1 >= models.size() || label2 >= models.size())
        throw std::invalid_argument("ns_covariance: label out of range");
    const std::size_t d = support.lattice->dims();
    const double inv_n = 1.0 / static_cast<double>(support.lattice->n_total());
    double acc = 0.0;
    bool same = true;
    for (std::size_t k = 0; k < d; ++k) same = same && (s1[k] == s2[k]);
    for (std::size_t p = 0; p < support.size(); ++p) {
        double phase = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            phase += support.lattice->omega_component(support.active[p], k) * (s1[k] - s2[k]);
        acc += std::sqrt((*g_diags[label1])[p] * (*g_diags[label2])[p]) * std::cos(phase);
    }
    return acc * inv_n + (same ? models[label1]->sigma2 : 0.0);
}

/// Label-marginal covariance: weights[k][loc] are the stick probabilities at
/// the two locations.  Diagnostics only.
inline double ns_covariance_marginal(const std::vector<const SpectralModel*>& models,
                                     const std::vector<const std::vector<double>*>& g_diags,
                                     const SpectralDiagonal& support, std::span<const double> s1,
                                     std::span<const double> s2, std::span<const double> weights1,
                                     std::span<const double> weights2) {
    const std::size_t d = support.lattice->dims();
    const std::size_t kc = models.size();
    const double inv_n = 1.0 / static_cast<double>(support.lattice->n_total());
    bool same = true;
    for (std::size_t k = 0; k < d; ++k) same = same && (s1[k] == s2[k]);
    double acc = 0.0;
    for (std::size_t p = 0; p < support.size(); ++p) {
        double a1 = 0.0, a2 = 0.0;
        for (std::size_t k = 0; k < kc; ++k) {
            const double root = std::sqrt((*g_diags[k])[p]);
            a1 += weights1[k] * root;
            a2 += weights2[k] * root;
        }
        double phase = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            phase += support.lattice->omega_component(support.active[p], k) * (s1[k] - s2[k]);
        acc += a1 * a2 * std::cos(phase);
    }
    double nugget = 0.0;
    if (same)
        for (std::size_t k = 0; k < kc; ++k) nugget += weights1[k] * models[k]->sigma2;
    return acc * inv_n + nugget;
}

namespace detail {

/// Metropolis update of the weight-field parameters against the marginal
/// FGP likelihood of L (covariance Q M Q* + I, unit nugget).
inline void update_weight_model(SpectralModel& theta_m, std::vector<double>& g_m,
                                const WhittleCache& l_cache, const SpectralDiagonal& support,
                                const PriorSet& priors, AdaptiveScale& scales, Rng& rng) {
    SpectralModel prop = theta_m;
    const double s = scales.scale();
    double jac = 0.0;
    prop.phi = theta_m.phi * std::exp(s * rng.normal());
    for (std::size_t k = 0; k < prop.rho.size(); ++k)
        prop.rho[k] = theta_m.rho[k] * std::exp(s * rng.normal());
    jac += std::log(prop.phi / theta_m.phi);
    for (std::size_t k = 0; k < prop.rho.size(); ++k) jac += std::log(prop.rho[k] / theta_m.rho[k]);

    auto log_target = [&](const SpectralModel& m, const std::vector<double>& g) {
        double lp = priors.weight_phi.log_density(m.phi);
        for (double r : m.rho) lp += priors.weight_rho.log_density(r);
        if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
        return latent_log_density(l_cache, g, 1.0) + lp;
    };

    double accept_prob = 0.0;
    bool accepted = false;
    try {
        std::vector<double> g_prop = eval_g(support, prop);
        const double log_ratio = log_target(prop, g_prop) - log_target(theta_m, g_m) + jac;
        accept_prob = std::isfinite(log_ratio) ? std::min(1.0, std::exp(log_ratio)) : 0.0;
        if (rng.uniform() < accept_prob) {
            theta_m = prop;
            g_m = std::move(g_prop);
            accepted = true;
        }
    } catch (const std::exception&) {
        accept_prob = 0.0;
    }
    scales.record(accept_prob, accepted);
}

/// Metropolis update of a component's mean-field parameters against the
/// conditional given the shared Y and the component's values at its labeled
/// cells only (the unlabeled cells are collapsed out and regenerated right
/// after):  Z_{s,k} | Y, theta ~ N((Q G^{1/2} Y)_s, sigma2) over labeled s.
/// With no labeled cells the exact conditional is the prior, drawn directly.
/// On acceptance comp.mu is replaced by the proposal's mean field.
inline void update_component_model(MixtureComponent& comp, const SpectralVector& y,
                                   const std::vector<std::size_t>& labeled_cells,
                                   const SpectralDiagonal& support, const PriorSet& priors,
                                   AdaptiveScale& scales, Rng& rng) {
    if (labeled_cells.empty()) {
        comp.theta_z.phi = priors.phi.draw(rng);
        for (auto& r : comp.theta_z.rho) r = priors.rho.draw(rng);
        comp.theta_z.sigma2 = priors.sigma2.draw(rng);
        comp.g_z = eval_g(support, comp.theta_z);
        SpectralVector coeffs(support.size());
        for (std::size_t p = 0; p < support.size(); ++p)
            coeffs[p] = std::sqrt(comp.g_z[p]) * y[p];
        comp.mu = inverse_transform(coeffs, support);
        return;
    }

    auto log_target = [&](const SpectralModel& m, const LatticeField& mu) {
        double lp = priors.phi.log_density(m.phi) + priors.sigma2.log_density(m.sigma2);
        for (double r : m.rho) lp += priors.rho.log_density(r);
        if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
        double rss = 0.0;
        for (std::size_t cell : labeled_cells) {
            const double d = comp.z.values[cell] - mu.values[cell];
            rss += d * d;
        }
        const double n_lab = static_cast<double>(labeled_cells.size());
        return -0.5 * (rss / m.sigma2 + n_lab * std::log(m.sigma2)) + lp;
    };

    SpectralModel prop = comp.theta_z;
    const double s = scales.scale();
    double jac = 0.0;
    prop.phi = comp.theta_z.phi * std::exp(s * rng.normal());
    for (std::size_t k = 0; k < prop.rho.size(); ++k)
        prop.rho[k] = comp.theta_z.rho[k] * std::exp(s * rng.normal());
    prop.sigma2 = comp.theta_z.sigma2 * std::exp(s * rng.normal());
    jac += std::log(prop.phi / comp.theta_z.phi) + std::log(prop.sigma2 / comp.theta_z.sigma2);
    for (std::size_t k = 0; k < prop.rho.size(); ++k)
        jac += std::log(prop.rho[k] / comp.theta_z.rho[k]);

    double accept_prob = 0.0;
    bool accepted = false;
    try {
        std::vector<double> g_prop = eval_g(support, prop);
        SpectralVector coeffs(support.size());
        for (std::size_t p = 0; p < support.size(); ++p)
            coeffs[p] = std::sqrt(g_prop[p]) * y[p];
        LatticeField mu_prop = inverse_transform(coeffs, support);
        const double log_ratio = log_target(prop, mu_prop) - log_target(comp.theta_z, comp.mu) + jac;
        accept_prob = std::isfinite(log_ratio) ? std::min(1.0, std::exp(log_ratio)) : 0.0;
        if (rng.uniform() < accept_prob) {
            comp.theta_z = prop;
            comp.g_z = std::move(g_prop);
            comp.mu = std::move(mu_prop);
            accepted = true;
        }
    } catch (const std::exception&) {
        accept_prob = 0.0;
    }
    scales.record(accept_prob, accepted);
}

}  // namespace detail

struct MixtureScales {
    std::vector<AdaptiveScale> theta_z;
    std::vector<AdaptiveScale> theta_m;

    void ensure(std::size_t k, double target, bool frozen) {
        while (theta_z.size() < k) {
            AdaptiveScale s;
            s.target = target;
            s.frozen = frozen;
            theta_z.push_back(s);
            theta_m.push_back(s);
        }
    }
    void freeze() {
        for (auto& s : theta_z) s.frozen = true;
        for (auto& s : theta_m) s.frozen = true;
    }
};

/// Instantiate a fresh component from the priors, conditional on the shared
/// spectral vector.
inline MixtureComponent draw_prior_component(const SpectralModel& proto_z, const SpectralModel& proto_m,
                                             const SpectralVector& y, const SpectralDiagonal& support,
                                             const PriorSet& priors, Rng& rng) {
    MixtureComponent c;
    c.theta_z = proto_z;
    c.theta_z.phi = priors.phi.draw(rng);
    for (auto& r : c.theta_z.rho) r = priors.rho.draw(rng);
    c.theta_z.sigma2 = priors.sigma2.draw(rng);
    c.theta_m = proto_m;
    c.theta_m.phi = priors.weight_phi.draw(rng);
    for (auto& r : c.theta_m.rho) r = priors.weight_rho.draw(rng);
    c.theta_m.sigma2 = 1.0;
    c.g_z = detail::eval_g(support, c.theta_z);
    c.g_m = detail::eval_g(support, c.theta_m);

    // eta from its FGP prior, spectrally
    c.zeta = draw_fold_symmetric(support, c.g_m, rng);
    c.eta = inverse_transform(c.zeta, support);

    // Z_k from its prior given Y
    SpectralVector coeffs(support.size());
    for (std::size_t p = 0; p < support.size(); ++p) coeffs[p] = std::sqrt(c.g_z[p]) * y[p];
    c.mu = inverse_transform(coeffs, support);
    c.z = c.mu;
    const double sd = std::sqrt(c.theta_z.sigma2);
    for (auto& v : c.z.values) v += rng.normal(0.0, sd);
    return c;
}

/// One sweep of the slice Gibbs sampler.  Step order (paper steps in
/// brackets): L [3], theta_M [4], eta [5], weights [6], slice [2], labels
/// [1] with stick extension, theta_Z [7], shared Y [8], mu [9], Z [10],
/// then the shared-noise layer.  Drawing the slice variable directly before
/// the label keeps the admissible set nonempty and the slice invariant
/// r < p_C exact at the end of every sweep.
inline void ns_gibbs_sweep(MixtureState& st, const ObservationSet& obs, const EmbeddedData& data,
                           const SpectralDiagonal& support, const PriorSet& priors,
                           const NoiseConfig& noise, const McmcConfig& mcmc, MixtureScales& scales,
                           double& nu2, Rng& rng) {
    const std::size_t n_cells = data.observed_cells.size();
    scales.ensure(st.k_active(), mcmc.adapt_target, false);

    // [3] truncated-normal draws of the probit auxiliaries L_k
    // [4] weight-field parameters against the marginal FGP likelihood of L
    // [5] eta from its spectral smoother conditional
    for (std::size_t k = 0; k < st.k_active(); ++k) {
        auto& comp = st.comps[k];
        if (comp.frozen) continue;
        if (k + 1 == st.k_max && st.k_active() == st.k_max) continue;  // pinned final stick
        LatticeField l_field(data.shape);
        std::vector<int> role(st.comps[k].eta.size(), 0);  // 0 untruncated, +1 >=0, -1 <0
        for (std::size_t c = 0; c < n_cells; ++c) {
            if (st.labels[c] == k)
                role[data.observed_cells[c]] = +1;
            else if (st.labels[c] > k)
                role[data.observed_cells[c]] = -1;
        }
        for (std::size_t cell = 0; cell < l_field.size(); ++cell) {
            const double e = comp.eta.values[cell];
            if (role[cell] > 0)
                l_field.values[cell] = rng.truncated_normal_lower(e, 1.0, 0.0);
            else if (role[cell] < 0)
                l_field.values[cell] = rng.truncated_normal_upper(e, 1.0, 0.0);
            else
                l_field.values[cell] = rng.normal(e, 1.0);
        }
        WhittleCache l_cache(l_field, support);
        for (std::size_t t = 0; t < mcmc.theta_proposals; ++t)
            detail::update_weight_model(comp.theta_m, comp.g_m, l_cache, support, priors,
                                        scales.theta_m[k], rng);
        // eta | L: per-frequency shrink M(M+I)^{-1} with variance M/(M+I)
        SpectralVector mean(support.size());
        std::vector<double> var(support.size());
        for (std::size_t p = 0; p < support.size(); ++p) {
            const double m = comp.g_m[p];
            mean[p] = m / (m + 1.0) * l_cache.coeffs[p];
            var[p] = m / (m + 1.0);
        }
        comp.zeta = draw_fold_symmetric(support, var, rng);
        for (std::size_t p = 0; p < support.size(); ++p) comp.zeta[p] += mean[p];
        comp.eta = inverse_transform(comp.zeta, support);
    }

    // [6] stick weights are recomputed on demand from eta below

    // [2] slice variables against the current weights
    for (std::size_t c = 0; c < n_cells; ++c)
        st.slice[c] = rng.uniform() * detail::stick_weight(st, data.observed_cells[c], st.labels[c]);

    // stick extension: instantiate components until no cell's uninstantiated
    // tail can beat its slice variable
    for (;;) {
        if (st.k_active() == st.k_max) break;
        double worst = 0.0;
        for (std::size_t c = 0; c < n_cells; ++c)
            worst = std::max(worst, detail::tail_mass(st, data.observed_cells[c]) - st.slice[c]);
        if (worst <= 0.0) break;
        st.comps.push_back(draw_prior_component(st.comps.front().theta_z, st.comps.front().theta_m,
                                                st.y, support, priors, rng));
        scales.ensure(st.k_active(), mcmc.adapt_target, scales.theta_z.front().frozen);
    }

    // [1] label draws over the slice-admissible set
    std::vector<double> logw(st.k_active());
    for (std::size_t c = 0; c < n_cells; ++c) {
        const std::size_t cell = data.observed_cells[c];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < st.k_active(); ++k) {
            if (detail::stick_weight(st, cell, k) <= st.slice[c]) {
                logw[k] = -std::numeric_limits<double>::infinity();
                continue;
            }
            double ll = 0.0;
            for (std::size_t i : data.cell_obs[c]) {
                const double nu2_i = obs.noise_var.empty() ? nu2 : obs.noise_var[i];
                const double lam = inflated_noise_var(nu2_i, 0.0, data.distance[i]);
                const double r = obs.values[i] - st.comps[k].z.values[cell];
                ll += -0.5 * (r * r / lam + std::log(lam));
            }
            logw[k] = ll;
            best = std::max(best, ll);
        }
        if (!std::isfinite(best))
            throw std::runtime_error("ns_gibbs_sweep: empty admissible label set at cell " +
                                     std::to_string(cell) + " with the stick fully extended");
        double total = 0.0;
        for (std::size_t k = 0; k < st.k_active(); ++k) {
            logw[k] = std::isfinite(logw[k]) ? std::exp(logw[k] - best) : 0.0;
            total += logw[k];
        }
        double u = rng.uniform() * total;
        std::size_t pick = 0;
        for (std::size_t k = 0; k < st.k_active(); ++k) {
            u -= logw[k];
            if (u <= 0.0) {
                pick = k;
                break;
            }
        }
        st.labels[c] = pick;
        st.comps[pick].last_visit = st.iter;
    }

    // freeze bookkeeping
    if (mcmc.freeze_after > 0) {
        for (std::size_t k = 0; k < st.k_active(); ++k) {
            auto& comp = st.comps[k];
            const bool stale = st.iter > comp.last_visit + mcmc.freeze_after;
            if (stale && !comp.frozen) {
                WhittleCache zc(comp.z, support);
                comp.z_coeffs = zc.coeffs;
                comp.z_sq_norm = zc.field_sq_norm;
                comp.frozen = true;
            } else if (!stale) {
                comp.frozen = false;
            }
        }
    }

    // labeled-cell lists per component
    std::vector<std::vector<std::size_t>> labeled(st.k_active());
    for (std::size_t c = 0; c < n_cells; ++c)
        labeled[st.labels[c]].push_back(data.observed_cells[c]);

    // [7] component mean-field parameters given Y and the labeled cells,
    // with the unlabeled cells collapsed out and regenerated from their
    // exact conditional N(mu_k, sigma_k^2) immediately after
    for (std::size_t k = 0; k < st.k_active(); ++k) {
        auto& comp = st.comps[k];
        if (comp.frozen) continue;
        const std::size_t reps = labeled[k].empty() ? 1 : mcmc.theta_proposals;
        for (std::size_t t = 0; t < reps; ++t)
            detail::update_component_model(comp, st.y, labeled[k], support, priors,
                                           scales.theta_z[k], rng);
        const double sd = std::sqrt(comp.theta_z.sigma2);
        std::size_t c = 0;
        for (std::size_t cell = 0; cell < comp.z.size(); ++cell) {
            bool is_labeled = false;
            if (c < n_cells && data.observed_cells[c] == cell) {
                is_labeled = (st.labels[c] == k);
                ++c;
            }
            if (!is_labeled) comp.z.values[cell] = rng.normal(comp.mu.values[cell], sd);
        }
        WhittleCache zc(comp.z, support);
        comp.z_coeffs = zc.coeffs;
        comp.z_sq_norm = zc.field_sq_norm;
    }

    // [8] shared spectral vector: precision I + sum_k G_k / sigma_k^2
    {
        const std::size_t m = support.size();
        SpectralVector mean(m);
        std::vector<double> var(m);
        for (std::size_t p = 0; p < m; ++p) {
            double prec = 1.0;
            std::complex<double> num{0.0, 0.0};
            for (const auto& comp : st.comps) {
                prec += comp.g_z[p] / comp.theta_z.sigma2;
                num += std::sqrt(comp.g_z[p]) / comp.theta_z.sigma2 * comp.z_coeffs[p];
            }
            mean[p] = num / prec;
            var[p] = 1.0 / prec;
        }
        st.y = draw_fold_symmetric(support, var, rng);
        for (std::size_t p = 0; p < m; ++p) st.y[p] += mean[p];
    }

    // [9] mu_k = Q G_k^{1/2} Y  and  [10] labeled-cell Z draws
    for (std::size_t k = 0; k < st.k_active(); ++k) {
        auto& comp = st.comps[k];
        if (comp.frozen) continue;
        SpectralVector coeffs(support.size());
        for (std::size_t p = 0; p < support.size(); ++p)
            coeffs[p] = std::sqrt(comp.g_z[p]) * st.y[p];
        comp.mu = inverse_transform(coeffs, support);

        const double s2 = comp.theta_z.sigma2;
        std::size_t c = 0;
        for (std::size_t cell = 0; cell < comp.z.size(); ++cell) {
            bool is_labeled = false;
            if (c < n_cells && data.observed_cells[c] == cell) {
                is_labeled = (st.labels[c] == k);
                ++c;
            }
            if (!is_labeled) continue;
            double prec = 1.0 / s2;
            double mean = comp.mu.values[cell] / s2;
            for (std::size_t i : data.cell_obs[c - 1]) {
                const double nu2_i = obs.noise_var.empty() ? nu2 : obs.noise_var[i];
                const double lam = inflated_noise_var(nu2_i, 0.0, data.distance[i]);
                prec += 1.0 / lam;
                mean += obs.values[i] / lam;
            }
            comp.z.values[cell] = rng.normal(mean / prec, std::sqrt(1.0 / prec));
        }
    }

    // shared observation-noise update
    if (noise.sample_nu2 && obs.noise_var.empty()) {
        double shape = priors.nu2.a;
        double rate = priors.nu2.b;
        for (std::size_t c = 0; c < n_cells; ++c) {
            const std::size_t cell = data.observed_cells[c];
            const double zc = st.comps[st.labels[c]].z.values[cell];
            for (std::size_t i : data.cell_obs[c]) {
                const double r = obs.values[i] - zc;
                shape += 0.5;
                rate += 0.5 * r * r;
            }
        }
        nu2 = rng.inverse_gamma(shape, rate);
    }
    ++st.iter;
}

/// Seeded initial state: identical component parameters, independent prior
/// weight fields, labels from the resulting sticks.
inline MixtureState ns_init_state(const SpectralModel& init_z, const SpectralModel& init_m,
                                  const ObservationSet& obs, const EmbeddedData& data,
                                  const SpectralDiagonal& support, const McmcConfig& mcmc,
                                  Rng& rng) {
    init_z.validate();
    if (!(init_z.sigma2 > 0.0) || !(init_z.phi > 0.0))
        throw std::invalid_argument("ns fit: phi and sigma2 must be > 0");
    MixtureState st;
    st.k_max = mcmc.k_max;
    std::vector<double> unit(support.size(), 1.0);
    st.y = draw_fold_symmetric(support, unit, rng);

    for (std::size_t k = 0; k < mcmc.k_init; ++k) {
        MixtureComponent c;
        c.theta_z = init_z;
        c.theta_m = init_m;
        c.theta_m.sigma2 = 1.0;
        c.g_z = detail::eval_g(support, c.theta_z);
        c.g_m = detail::eval_g(support, c.theta_m);
        c.zeta = draw_fold_symmetric(support, c.g_m, rng);
        c.eta = inverse_transform(c.zeta, support);
        SpectralVector coeffs(support.size());
        for (std::size_t p = 0; p < support.size(); ++p) coeffs[p] = std::sqrt(c.g_z[p]) * st.y[p];
        c.mu = inverse_transform(coeffs, support);
        c.z = c.mu;
        const double sd = std::sqrt(c.theta_z.sigma2);
        for (auto& v : c.z.values) v += rng.normal(0.0, sd);
        // observed cells start at the data values so early label draws see
        // data-consistent fields
        st.comps.push_back(std::move(c));
    }
    for (std::size_t c = 0; c < data.observed_cells.size(); ++c) {
        double mean = 0.0;
        for (std::size_t i : data.cell_obs[c]) mean += obs.values[i];
        mean /= static_cast<double>(data.cell_obs[c].size());
        for (auto& comp : st.comps) comp.z.values[data.observed_cells[c]] = mean;
    }

    // warm start: everything in the first component; splits happen through
    // the label draws against the prior-refreshed empty components
    const std::size_t n_cells = data.observed_cells.size();
    st.labels.assign(n_cells, 0);
    st.slice.resize(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c)
        st.slice[c] = rng.uniform() * detail::stick_weight(st, data.observed_cells[c], 0);
    return st;
}

/// Per-draw spectral state retained for post-hoc prediction.
struct NsSnapshot {
    SpectralVector y;
    std::vector<SpectralVector> zetas;
    std::vector<SpectralModel> models_z;
    double nu2 = 0.0;
};

/// One retained draw of one component's parameters (tidy format).
struct NsComponentDraw {
    std::size_t iteration = 0;
    std::size_t component = 0;
    double occupancy = 0.0;
    SpectralModel theta_z;
    SpectralModel theta_m;
    double nu2 = 0.0;
};

struct NsFitResult {
    std::vector<NsComponentDraw> comp_draws;
    std::size_t retained = 0;
    std::size_t k_active_final = 0;

    std::vector<double> occupancy_mean;  // per native component
    std::vector<std::size_t> dominating;  // components with occupancy > 5%, occupancy-sorted
    std::vector<double> pbar;             // mean stick weight, component-major over lattice cells
    LatticeField modal_labels;            // argmax_k pbar per cell, stored as double

    std::vector<NsSnapshot> snapshots;
    bool has_online_prediction = false;
    Prediction online_prediction;

    /// Posterior-mean range of a component, native label.
    double mean_param(std::size_t comp, auto&& getter) const {
        double acc = 0.0;
        std::size_t count = 0;
        for (const auto& d : comp_draws)
            if (d.component == comp) {
                acc += getter(d);
                ++count;
            }
        return count ? acc / static_cast<double>(count) : 0.0;
    }
};

/// Stick weights at one point given per-component eta values there.
inline std::vector<double> stick_weights_from_eta(const std::vector<double>& eta, std::size_t k_max) {
    std::vector<double> p(eta.size());
    double stick = 1.0;
    for (std::size_t k = 0; k < eta.size(); ++k) {
        const double u = (k + 1 == k_max) ? 1.0 : norm_cdf(eta[k]);
        p[k] = stick * u;
        stick *= 1.0 - u;
    }
    return p;
}

/// Runs the non-stationary sampler.  Targets, when given (lattice units),
/// are predicted online with the modal-label rule so no per-draw spectral
/// state needs persisting; `snapshot_stride` additionally retains every
/// k-th draw's spectral state for post-hoc prediction.
inline NsFitResult ns_fit(const ObservationSet& obs, const EmbeddedData& data,
                          const SpectralDiagonal& support, const SpectralModel& init_z,
                          const SpectralModel& init_m, const McmcConfig& mcmc,
                          const PriorSet& priors, const NoiseConfig& noise,
                          const std::vector<std::vector<double>>& targets = {},
                          std::size_t snapshot_stride = 8) {
    mcmc.validate();

    // the single-component mixture is exactly the stationary model; run the
    // stationary sampler so the degeneracy is literal, draws and all
    if (mcmc.k_max == 1) {
        McmcConfig one = mcmc;
        one.chains = 1;
        auto fit = fit_stationary(obs, data, support, init_z, one, priors, noise);
        NsFitResult out;
        const auto& ch = fit.chains[0];
        out.retained = ch.rows.size();
        out.k_active_final = 1;
        out.occupancy_mean = {1.0};
        out.dominating = {0};
        out.pbar.assign(data.n_total(), 1.0);
        out.modal_labels = LatticeField(data.shape, 0.0);
        for (std::size_t d = 0; d < ch.rows.size(); ++d) {
            NsComponentDraw cd;
            cd.iteration = ch.iteration[d];
            cd.component = 0;
            cd.occupancy = 1.0;
            cd.theta_z = ch.models[d];
            cd.theta_m = init_m;
            cd.nu2 = ch.nu2[d];
            out.comp_draws.push_back(std::move(cd));
            if (snapshot_stride > 0 && (d + 1) % snapshot_stride == 0) {
                NsSnapshot snap;
                snap.y = ch.y_draws[d];
                snap.zetas = {SpectralVector(support.size(), {0.0, 0.0})};
                snap.models_z = {ch.models[d]};
                snap.nu2 = ch.nu2[d];
                out.snapshots.push_back(std::move(snap));
            }
        }
        if (!targets.empty()) {
            out.has_online_prediction = true;
            out.online_prediction = predict_stationary(fit, support, targets);
        }
        return out;
    }

    Rng rng = Rng(mcmc.seed).fork(0);
    MixtureState st = ns_init_state(init_z, init_m, obs, data, support, mcmc, rng);
    MixtureScales scales;
    scales.ensure(st.k_active(), mcmc.adapt_target, !mcmc.adapt);
    double nu2 = noise.nu2_init;

    NsFitResult out;
    const std::size_t n_cells = data.observed_cells.size();
    const std::size_t lattice_cells = data.n_total();
    std::vector<double> pbar_acc(mcmc.k_max * lattice_cells, 0.0);
    std::vector<double> occ_acc(mcmc.k_max, 0.0);

    const std::size_t nt = targets.size();
    std::vector<double> pred_mean(nt, 0.0), pred_mean_sq(nt, 0.0), pred_var(nt, 0.0);
    OffsiteProjector proj(support);
    // per-component eta at the targets, reused while a component is frozen
    std::vector<std::vector<double>> eta_at_targets;
    std::vector<bool> eta_cache_valid;

    for (std::size_t step = 1; step <= mcmc.steps; ++step) {
        if (step == mcmc.burn_in + 1) scales.freeze();
        ns_gibbs_sweep(st, obs, data, support, priors, noise, mcmc, scales, nu2, rng);
        for (const auto& comp : st.comps)
            if (detail::any_nonfinite(comp.z.values))
                throw std::runtime_error("ns fit: divergent state at iteration " + std::to_string(step));
        for (std::size_t k = 0; k < eta_cache_valid.size() && k < st.k_active(); ++k)
            if (!st.comps[k].frozen) eta_cache_valid[k] = false;

        if (step <= mcmc.burn_in || (step - mcmc.burn_in) % mcmc.thin != 0) continue;
        ++out.retained;

        std::vector<double> occ(st.k_active(), 0.0);
        for (std::size_t c = 0; c < n_cells; ++c) occ[st.labels[c]] += 1.0;
        for (auto& o : occ) o /= static_cast<double>(n_cells);
        for (std::size_t k = 0; k < st.k_active(); ++k) {
            occ_acc[k] += occ[k];
            NsComponentDraw d;
            d.iteration = step;
            d.component = k;
            d.occupancy = occ[k];
            d.theta_z = st.comps[k].theta_z;
            d.theta_m = st.comps[k].theta_m;
            d.nu2 = nu2;
            out.comp_draws.push_back(std::move(d));
        }
        for (std::size_t cell = 0; cell < lattice_cells; ++cell) {
            std::vector<double> eta(st.k_active());
            for (std::size_t k = 0; k < st.k_active(); ++k) eta[k] = st.comps[k].eta.values[cell];
            auto p = stick_weights_from_eta(eta, mcmc.k_max);
            for (std::size_t k = 0; k < st.k_active(); ++k) pbar_acc[k * lattice_cells + cell] += p[k];
        }

        if (nt > 0) {
            eta_at_targets.resize(st.k_active());
            eta_cache_valid.resize(st.k_active(), false);
            for (std::size_t k = 0; k < st.k_active(); ++k) {
                if (st.comps[k].frozen && eta_cache_valid[k] && !eta_at_targets[k].empty()) continue;
                eta_at_targets[k].resize(nt);
                for (std::size_t t = 0; t < nt; ++t)
                    eta_at_targets[k][t] = proj.project(st.comps[k].zeta, targets[t]);
                eta_cache_valid[k] = true;
            }
            std::vector<double> eta_t(st.k_active());
            std::vector<SpectralVector> comp_coeffs(st.k_active());
            for (std::size_t t = 0; t < nt; ++t) {
                for (std::size_t k = 0; k < st.k_active(); ++k) eta_t[k] = eta_at_targets[k][t];
                auto p = stick_weights_from_eta(eta_t, mcmc.k_max);
                std::size_t best = 0;
                for (std::size_t k = 1; k < p.size(); ++k)
                    if (p[k] > p[best]) best = k;
                if (comp_coeffs[best].empty()) {
                    comp_coeffs[best].resize(support.size());
                    for (std::size_t q = 0; q < support.size(); ++q)
                        comp_coeffs[best][q] = std::sqrt(st.comps[best].g_z[q]) * st.y[q];
                }
                const double m = proj.project(comp_coeffs[best], targets[t]);
                pred_mean[t] += m;
                pred_mean_sq[t] += m * m;
                pred_var[t] += nu2 + st.comps[best].theta_z.sigma2;
            }
        }

        if (snapshot_stride > 0 && out.retained % snapshot_stride == 0) {
            NsSnapshot snap;
            snap.y = st.y;
            snap.nu2 = nu2;
            for (const auto& comp : st.comps) {
                snap.zetas.push_back(comp.zeta);
                snap.models_z.push_back(comp.theta_z);
            }
            out.snapshots.push_back(std::move(snap));
        }
    }

    out.k_active_final = st.k_active();
    out.occupancy_mean.assign(occ_acc.begin(), occ_acc.begin() + static_cast<long>(st.k_active()));
    for (auto& o : out.occupancy_mean) o /= static_cast<double>(std::max<std::size_t>(out.retained, 1));
    std::vector<std::size_t> order(st.k_active());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return out.occupancy_mean[a] > out.occupancy_mean[b]; });
    for (std::size_t k : order)
        if (out.occupancy_mean[k] > 0.05) out.dominating.push_back(k);

    out.pbar.assign(st.k_active() * lattice_cells, 0.0);
    out.modal_labels = LatticeField(data.shape);
    for (std::size_t cell = 0; cell < lattice_cells; ++cell) {
        std::size_t best = 0;
        for (std::size_t k = 0; k < st.k_active(); ++k) {
            const double v = pbar_acc[k * lattice_cells + cell] /
                             static_cast<double>(std::max<std::size_t>(out.retained, 1));
            out.pbar[k * lattice_cells + cell] = v;
            if (v > out.pbar[best * lattice_cells + cell]) best = k;
        }
        out.modal_labels.values[cell] = static_cast<double>(best);
    }

    if (nt > 0) {
        out.has_online_prediction = true;
        out.online_prediction.mean.resize(nt);
        out.online_prediction.variance.resize(nt);
        const double dn = static_cast<double>(std::max<std::size_t>(out.retained, 1));
        for (std::size_t t = 0; t < nt; ++t) {
            const double m = pred_mean[t] / dn;
            const double between = std::max(0.0, pred_mean_sq[t] / dn - m * m);
            out.online_prediction.mean[t] = m;
            out.online_prediction.variance[t] = pred_var[t] / dn + between;
        }
    }
    return out;
}

/// Post-hoc prediction from retained snapshots (targets in lattice units):
/// per draw the component is the stick-weight argmax at the target, the mean
/// is the component projection of the shared Y, the variance nu2 + sigma_k2.
inline Prediction ns_predict(const std::vector<NsSnapshot>& snaps, const SpectralDiagonal& support,
                             const std::vector<std::vector<double>>& targets, std::size_t k_max) {
    if (snaps.empty()) throw std::invalid_argument("ns_predict: no retained snapshots");
    const std::size_t nt = targets.size();
    Prediction out;
    out.mean.assign(nt, 0.0);
    out.variance.assign(nt, 0.0);
    std::vector<double> mean_sq(nt, 0.0);
    OffsiteProjector proj(support);
    for (const auto& snap : snaps) {
        const std::size_t kc = snap.zetas.size();
        std::vector<SpectralVector> comp_coeffs(kc);
        std::vector<double> eta(kc);
        for (std::size_t t = 0; t < nt; ++t) {
            for (std::size_t k = 0; k < kc; ++k) eta[k] = proj.project(snap.zetas[k], targets[t]);
            auto p = stick_weights_from_eta(eta, k_max);
            std::size_t best = 0;
            for (std::size_t k = 1; k < kc; ++k)
                if (p[k] > p[best]) best = k;
            if (comp_coeffs[best].empty()) {
                comp_coeffs[best].resize(support.size());
                const auto g = detail::eval_g(support, snap.models_z[best]);
                for (std::size_t q = 0; q < support.size(); ++q)
                    comp_coeffs[best][q] = std::sqrt(g[q]) * snap.y[q];
            }
            const double m = proj.project(comp_coeffs[best], targets[t]);
            out.mean[t] += m;
            mean_sq[t] += m * m;
            out.variance[t] += snap.nu2 + snap.models_z[best].sigma2;
        }
    }
    const double dn = static_cast<double>(snaps.size());
    for (std::size_t t = 0; t < nt; ++t) {
        out.mean[t] /= dn;
        const double between = std::max(0.0, mean_sq[t] / dn - out.mean[t] * out.mean[t]);
        out.variance[t] = out.variance[t] / dn + between;
    }
    return out;
}

}  // namespace fgp
