#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgp/detrend.hpp"
#include "fgp/mixture.hpp"
#include "fgp/stationary.hpp"

namespace fgp {

/// Full run configuration shared by the CLI and the benchmark harness.
struct RunConfig {
    SpectralModel model;         // initial covariance model (and eps_rel)
    SpectralModel weight_model{Family::squared_exponential, 25.0, {5.0}, 1.5, 1.0};
    McmcConfig mcmc;
    PriorSet priors;
    NoiseConfig noise;
    EmbedMode mode = EmbedMode::strict;
    std::vector<std::size_t> target_shape;  // required for misaligned mode
    bool truncate = true;                   // apply eps_rel when building the support
    std::vector<int> trend_degree;          // per coordinate; empty disables detrending

    // data block (CLI)
    std::string data_path;
    std::vector<std::string> coord_columns{"s1", "s2"};
    std::string value_column{"z"};
    std::string noise_column;
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{{"model", c.model},
                       {"weight_model", c.weight_model},
                       {"mcmc", c.mcmc},
                       {"priors", c.priors},
                       {"noise", c.noise},
                       {"truncate", c.truncate},
                       {"data",
                        {{"path", c.data_path},
                         {"coords", c.coord_columns},
                         {"value", c.value_column},
                         {"noise", c.noise_column},
                         {"mode", c.mode == EmbedMode::strict ? "strict" : "misaligned"},
                         {"target_shape", c.target_shape}}},
                       {"trend", {{"degree", c.trend_degree}}}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
    c.model = j.at("model").get<SpectralModel>();
    if (j.contains("weight_model")) c.weight_model = j.at("weight_model").get<SpectralModel>();
    c.weight_model.sigma2 = 1.0;  // fixed unit nugget of the weight-field model
    if (j.contains("mcmc")) c.mcmc = j.at("mcmc").get<McmcConfig>();
    if (j.contains("priors")) c.priors = j.at("priors").get<PriorSet>();
    if (j.contains("noise")) c.noise = j.at("noise").get<NoiseConfig>();
    c.truncate = j.value("truncate", true);
    if (j.contains("data")) {
        const auto& d = j.at("data");
        c.data_path = d.value("path", std::string{});
        if (d.contains("coords")) c.coord_columns = d.at("coords").get<std::vector<std::string>>();
        c.value_column = d.value("value", std::string{"z"});
        if (d.contains("noise") && d.at("noise").is_string()) c.noise_column = d.at("noise").get<std::string>();
        const std::string mode = d.value("mode", std::string{"strict"});
        if (mode == "strict")
            c.mode = EmbedMode::strict;
        else if (mode == "misaligned")
            c.mode = EmbedMode::misaligned;
        else
            throw std::invalid_argument("config: data.mode must be strict or misaligned");
        if (d.contains("target_shape")) c.target_shape = d.at("target_shape").get<std::vector<std::size_t>>();
    }
    if (j.contains("trend") && j.at("trend").contains("degree"))
        c.trend_degree = j.at("trend").at("degree").get<std::vector<int>>();
}

/// Embedding plus the frequency support for a data set under a config.
struct PreparedData {
    EmbeddedData data;
    SpectralDiagonal support;
};

inline PreparedData prepare(const ObservationSet& obs, const RunConfig& cfg) {
    PreparedData out;
    std::optional<std::vector<std::size_t>> shape;
    if (!cfg.target_shape.empty()) shape = cfg.target_shape;
    out.data = embed(obs, cfg.mode, shape);
    auto lat = std::make_shared<FrequencyLattice>(out.data.shape, out.data.shape);
    out.support = truncate_spectrum(cfg.model, lat, cfg.truncate ? cfg.model.eps_rel : 0.0);
    return out;
}

enum class CvMethod { stationary, nonstationary };

struct CvReport {
    std::string method;
    double rmse = 0.0;
    double mad = 0.0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    double fit_seconds = 0.0;
    double predict_seconds = 0.0;
    // audit rows: coordinates, truth, predicted mean, predicted sd
    std::vector<std::vector<double>> predictions;

    /// Recompute the metrics from the audit rows (coordinates d, then
    /// truth, mean, sd).
    static std::pair<double, double> metrics_from_rows(const std::vector<std::vector<double>>& rows,
                                                       std::size_t dims) {
        double sse = 0.0;
        std::vector<double> abserr;
        for (const auto& r : rows) {
            const double e = r[dims] - r[dims + 1];
            sse += e * e;
            abserr.push_back(std::abs(e));
        }
        std::sort(abserr.begin(), abserr.end());
        const std::size_t n = abserr.size();
        const double rmse = std::sqrt(sse / static_cast<double>(n));
        const double mad = n % 2 == 1 ? abserr[n / 2] : 0.5 * (abserr[n / 2 - 1] + abserr[n / 2]);
        return {rmse, mad};
    }
};

/// Seeded random split, fit on the training part, predict the held-out part.
inline CvReport cross_validate(const ObservationSet& obs, CvMethod method, double split_fraction,
                               const RunConfig& cfg, Rng& rng) {
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw std::invalid_argument("cross_validate: split fraction must be in (0,1)");
    obs.validate();
    const std::size_t n = obs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    const std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(split_fraction * n));

    ObservationSet train, test;
    train.dims = test.dims = obs.dims;
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = (i < n_train) ? train : test;
        const std::size_t src = order[i];
        for (std::size_t k = 0; k < obs.dims; ++k) dst.coords.push_back(obs.coords[src * obs.dims + k]);
        dst.values.push_back(obs.values[src]);
        if (!obs.noise_var.empty()) dst.noise_var.push_back(obs.noise_var[src]);
    }

    CvReport rep;
    rep.method = method == CvMethod::stationary ? "stationary" : "nonstationary";
    rep.train_size = train.size();
    rep.test_size = test.size();

    auto prepared = prepare(train, cfg);
    std::vector<std::vector<double>> targets;
    for (std::size_t i = 0; i < test.size(); ++i)
        targets.push_back(prepared.data.to_lattice_units(
            std::span<const double>(test.coords.data() + i * test.dims, test.dims)));

    const auto t0 = std::chrono::steady_clock::now();
    Prediction pred;
    if (method == CvMethod::stationary) {
        auto fit = fit_stationary(train, prepared.data, prepared.support, cfg.model, cfg.mcmc,
                                  cfg.priors, cfg.noise);
        const auto t1 = std::chrono::steady_clock::now();
        pred = predict_stationary(fit, prepared.support, targets);
        const auto t2 = std::chrono::steady_clock::now();
        rep.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
        rep.predict_seconds = std::chrono::duration<double>(t2 - t1).count();
    } else {
        auto fit = ns_fit(train, prepared.data, prepared.support, cfg.model, cfg.weight_model,
                          cfg.mcmc, cfg.priors, cfg.noise, targets);
        const auto t1 = std::chrono::steady_clock::now();
        pred = fit.online_prediction;
        rep.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
        rep.predict_seconds = 0.0;
    }

    for (std::size_t i = 0; i < test.size(); ++i) {
        std::vector<double> row;
        for (std::size_t k = 0; k < test.dims; ++k) row.push_back(test.coords[i * test.dims + k]);
        row.push_back(test.values[i]);
        row.push_back(pred.mean[i]);
        row.push_back(std::sqrt(std::max(0.0, pred.variance[i])));
        rep.predictions.push_back(std::move(row));
    }
    auto [rmse, mad] = CvReport::metrics_from_rows(rep.predictions, test.dims);
    rep.rmse = rmse;
    rep.mad = mad;
    return rep;
}

struct ScalingRow {
    std::size_t n = 0;
    std::size_t m_active = 0;
    double sec_likelihood_truncated = 0.0;
    double sec_likelihood_full = 0.0;
    double sec_sweep = 0.0;
};

namespace detail {

template <typename F>
double median_seconds(F&& body, int reps) {
    std::vector<double> times;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

}  // namespace detail

/// Wall-clock medians of the cached-transform likelihood evaluation
/// (truncated versus full support) and of one Gibbs sweep, per lattice size.
inline std::vector<ScalingRow> scaling_probe(const std::vector<std::size_t>& sizes,
                                             const SpectralModel& model, int reps = 5,
                                             std::uint64_t seed = 17) {
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1]) throw std::invalid_argument("scaling_probe: sizes must ascend");
    std::vector<ScalingRow> rows;
    for (std::size_t n : sizes) {
        Rng rng(seed);
        auto lat = std::make_shared<FrequencyLattice>(std::vector<std::size_t>{n},
                                                      std::vector<std::size_t>{n});
        auto support_full = truncate_spectrum(model, lat, 0.0);
        auto support_trunc = truncate_spectrum(model, lat, model.eps_rel);

        LatticeField z = draw_prior_field(support_full, detail::eval_g(support_full, model),
                                          std::max(model.sigma2, 1e-8), rng);
        WhittleCache cache_full(z, support_full);
        WhittleCache cache_trunc(z, support_trunc);

        ScalingRow row;
        row.n = n;
        row.m_active = support_trunc.size();
        volatile double sink = 0.0;
        row.sec_likelihood_full = detail::median_seconds(
            [&] { sink = sink + latent_log_density(cache_full, support_full, model); }, reps);
        row.sec_likelihood_truncated = detail::median_seconds(
            [&] { sink = sink + latent_log_density(cache_trunc, support_trunc, model); }, reps);

        // half-observed data set for the sweep timing
        ObservationSet obs;
        obs.dims = 1;
        for (std::size_t c = 0; c < n; c += 2) {
            obs.coords.push_back(static_cast<double>(c + 1));
            obs.values.push_back(z.values[c]);
        }
        auto data = embed(obs, EmbedMode::strict, std::vector<std::size_t>{n});
        PriorSet priors;
        NoiseConfig noise;
        noise.sample_nu2 = true;
        noise.nu2_init = 0.1;
        AdaptiveScale scales;
        auto st = init_state(model, obs, data, support_full, noise, rng);
        stationary_sweep(st, obs, data, support_full, priors, noise, scales, rng);  // warm-up plans
        row.sec_sweep = detail::median_seconds(
            [&] { stationary_sweep(st, obs, data, support_full, priors, noise, scales, rng); }, reps);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fgp
