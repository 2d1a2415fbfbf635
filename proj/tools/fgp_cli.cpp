// Command-line front end: simulation, fitting, prediction, cross-validation,
// chain diagnostics and the scaling probe.  All file outputs are written
// atomically; exit code 0 on success, 1 on validation errors, 2 on runtime
// failures.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fgp/fgp.hpp"

namespace fs = std::filesystem;
using namespace fgp;

namespace {

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

RunConfig load_run_config(const std::string& path, const std::string& data_override) {
    RunConfig cfg = read_json_file(path).get<RunConfig>();
    if (!data_override.empty()) cfg.data_path = data_override;
    if (cfg.data_path.empty())
        throw std::invalid_argument("config validation: data.path is required (or pass --data)");
    if (!fs::exists(cfg.data_path))
        throw std::invalid_argument("config validation: data.path does not exist: " + cfg.data_path);
    if (cfg.mode == EmbedMode::misaligned && cfg.target_shape.empty())
        throw std::invalid_argument("config validation: misaligned mode requires data.target_shape");
    return cfg;
}

struct LoadedData {
    ObservationSet obs;  // detrended when a trend block is present
    std::optional<TrendFit> trend;
};

LoadedData load_and_detrend(const RunConfig& cfg) {
    LoadedData out;
    out.obs = ingest_csv(cfg.data_path, cfg.coord_columns, cfg.value_column, cfg.noise_column);
    if (!cfg.trend_degree.empty()) {
        auto [resid, fit] = detrend(out.obs, cfg.trend_degree);
        out.obs = std::move(resid);
        out.trend = std::move(fit);
    }
    return out;
}

void write_prediction_csv(const fs::path& path, const std::vector<std::string>& coord_columns,
                          const std::vector<std::vector<double>>& targets, const Prediction& pred,
                          const TrendFit* trend) {
    atomic_write(path, [&](std::ostream& o) {
        for (const auto& c : coord_columns) o << c << ",";
        o << "mean,sd\n";
        o.precision(17);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            double mean = pred.mean[i];
            if (trend) mean += trend->value(targets[i]);
            for (double c : targets[i]) o << c << ",";
            o << mean << "," << std::sqrt(std::max(0.0, pred.variance[i])) << "\n";
        }
    });
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed) {
    SimSpec spec = read_json_file(spec_path).get<SimSpec>();
    if (seed != 0) spec.seed = seed;
    fs::create_directories(out_dir);
    Rng rng(spec.seed);

    std::vector<std::string> coord_cols;
    for (std::size_t k = 0; k < spec.dims(); ++k) coord_cols.push_back("s" + std::to_string(k + 1));

    if (spec.kind == GeneratorKind::pintore_ns) {
        auto out = simulate_pintore_ns(spec, rng);
        write_observations_csv(fs::path(out_dir) / "observations.csv", out.obs, coord_cols, "z");
        atomic_write(fs::path(out_dir) / "truth.csv", [&](std::ostream& o) {
            o << "s1,s2,rho\n";
            o.precision(17);
            for (int a = 0; a <= 50; ++a)
                for (int b = 0; b <= 50; ++b) {
                    const double s1 = spec.lo[0] + (spec.hi[0] - spec.lo[0]) * a / 50.0;
                    const double s2 = spec.lo[1] + (spec.hi[1] - spec.lo[1]) * b / 50.0;
                    o << s1 << "," << s2 << "," << pintore_rho(s1, s2) << "\n";
                }
        });
    } else {
        auto obs = simulate_stationary(spec, rng);
        write_observations_csv(fs::path(out_dir) / "observations.csv", obs, coord_cols, "z");
        atomic_write(fs::path(out_dir) / "truth.csv", [&](std::ostream& o) {
            o << "parameter,value\n";
            o.precision(17);
            o << "family," << family_name(spec.model.family) << "\n";
            o << "phi," << spec.model.phi << "\n";
            for (std::size_t k = 0; k < spec.model.rho.size(); ++k)
                o << "rho" << (spec.model.rho.size() > 1 ? std::to_string(k + 1) : "") << ","
                  << spec.model.rho[k] << "\n";
            o << "kappa," << spec.model.kappa << "\n";
            o << "sigma2," << spec.model.sigma2 << "\n";
            o << "nu2," << spec.nu2 << "\n";
        });
    }
    std::cout << "wrote " << out_dir << "/observations.csv and truth.csv\n";
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& config_path, const std::string& out_dir) {
    RunConfig cfg = load_run_config(config_path, data_path);
    auto loaded = load_and_detrend(cfg);
    auto prepared = prepare(loaded.obs, cfg);
    auto fit = fit_stationary(loaded.obs, prepared.data, prepared.support, cfg.model, cfg.mcmc,
                              cfg.priors, cfg.noise);

    nlohmann::json echo = cfg;
    if (loaded.trend) echo["trend"]["beta"] = loaded.trend->beta;
    save_posterior(out_dir, fit, prepared.support, prepared.data, echo);

    std::cout << "posterior written to " << out_dir << "\n";
    for (std::size_t p = 0; p < fit.param_names.size(); ++p)
        std::cout << "  " << fit.param_names[p] << ": mean " << fit.mean[p] << " sd " << fit.sd[p]
                  << "\n";
    std::cout << "  acceptance rate: " << fit.chains.front().acceptance_rate << "\n";
    return 0;
}

int cmd_fit_ns(const std::string& data_path, const std::string& config_path,
               const std::string& out_dir) {
    RunConfig cfg = load_run_config(config_path, data_path);
    auto loaded = load_and_detrend(cfg);
    auto prepared = prepare(loaded.obs, cfg);
    auto fit = ns_fit(loaded.obs, prepared.data, prepared.support, cfg.model, cfg.weight_model,
                      cfg.mcmc, cfg.priors, cfg.noise);

    nlohmann::json echo = cfg;
    if (loaded.trend) echo["trend"]["beta"] = loaded.trend->beta;
    save_ns_posterior(out_dir, fit, prepared.support, prepared.data, cfg.mcmc.k_max, echo);
    write_lattice_csv(fs::path(out_dir) / "modal_labels.csv", fit.modal_labels);
    const std::size_t cells = prepared.data.n_total();
    for (std::size_t k = 0; k * cells < fit.pbar.size(); ++k) {
        LatticeField w(prepared.data.shape);
        for (std::size_t c = 0; c < cells; ++c) w.values[c] = fit.pbar[k * cells + c];
        write_lattice_csv(fs::path(out_dir) / ("weight_field_" + std::to_string(k + 1) + ".csv"), w);
    }

    std::cout << "posterior written to " << out_dir << "\n";
    std::cout << "  components instantiated: " << fit.k_active_final << "\n";
    std::cout << "  dominating (occupancy > 5%): " << fit.dominating.size() << "\n";
    for (std::size_t k : fit.dominating) {
        const double rho = fit.mean_param(k, [](const NsComponentDraw& d) { return d.theta_z.rho[0]; });
        std::cout << "    component " << k << ": occupancy " << fit.occupancy_mean[k] << ", rho "
                  << rho << "\n";
    }
    return 0;
}

int cmd_predict(const std::string& posterior_dir, const std::string& targets_path,
                const std::string& out_path) {
    if (!fs::exists(fs::path(posterior_dir) / "meta.json"))
        throw std::invalid_argument("no posterior at " + posterior_dir);
    nlohmann::json meta = read_json_file((fs::path(posterior_dir) / "meta.json").string());
    const std::string kind = meta.value("kind", "stationary");

    std::vector<std::string> coord_cols = {"s1", "s2"};
    if (meta.contains("config") && meta["config"].contains("data") &&
        meta["config"]["data"].contains("coords"))
        coord_cols = meta["config"]["data"]["coords"].get<std::vector<std::string>>();

    auto targets_orig = ingest_targets(targets_path, coord_cols);

    std::optional<TrendFit> trend;
    if (meta.contains("config") && meta["config"].contains("trend") &&
        meta["config"]["trend"].contains("beta")) {
        TrendFit t;
        t.degree = meta["config"]["trend"]["degree"].get<std::vector<int>>();
        t.beta = meta["config"]["trend"]["beta"].get<std::vector<double>>();
        trend = std::move(t);
    }

    if (kind == "stationary") {
        auto loaded = load_posterior(posterior_dir);
        std::vector<std::vector<double>> targets;
        for (const auto& t : targets_orig) targets.push_back(loaded.data.to_lattice_units(t));
        auto pred = predict_stationary(loaded.fit, loaded.support, targets);
        write_prediction_csv(out_path, coord_cols, targets_orig, pred, trend ? &*trend : nullptr);
    } else {
        auto loaded = load_ns_posterior(posterior_dir);
        std::vector<std::vector<double>> targets;
        for (const auto& t : targets_orig) targets.push_back(loaded.data.to_lattice_units(t));
        auto pred = ns_predict(loaded.snapshots, loaded.support, targets, loaded.k_max);
        write_prediction_csv(out_path, coord_cols, targets_orig, pred, trend ? &*trend : nullptr);
    }
    std::cout << "predictions written to " << out_path << "\n";
    return 0;
}

int cmd_cv(const std::string& data_path, const std::string& config_path, double split,
           const std::string& method, const std::string& out_dir, std::uint64_t seed) {
    RunConfig cfg = load_run_config(config_path, data_path);
    auto loaded = load_and_detrend(cfg);
    CvMethod m = CvMethod::stationary;
    if (method == "nonstationary" || method == "ns")
        m = CvMethod::nonstationary;
    else if (method != "stationary")
        throw std::invalid_argument("cv: method must be stationary or nonstationary");
    Rng rng(seed ? seed : cfg.mcmc.seed);
    auto rep = cross_validate(loaded.obs, m, split, cfg, rng);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        atomic_write(fs::path(out_dir) / "cv_report.json", [&](std::ostream& o) {
            nlohmann::json j{{"method", rep.method},
                             {"rmse", rep.rmse},
                             {"mad", rep.mad},
                             {"train_size", rep.train_size},
                             {"test_size", rep.test_size},
                             {"fit_seconds", rep.fit_seconds},
                             {"predict_seconds", rep.predict_seconds}};
            o << j.dump(2) << "\n";
        });
        atomic_write(fs::path(out_dir) / "cv_predictions.csv", [&](std::ostream& o) {
            for (const auto& c : cfg.coord_columns) o << c << ",";
            o << "truth,mean,sd\n";
            o.precision(17);
            for (const auto& row : rep.predictions) {
                for (std::size_t i = 0; i < row.size(); ++i) o << (i ? "," : "") << row[i];
                o << "\n";
            }
        });
    }
    std::cout << rep.method << " cv: rmse " << rep.rmse << " mad " << rep.mad << " (train "
              << rep.train_size << ", test " << rep.test_size << ", fit " << rep.fit_seconds
              << "s)\n";
    return 0;
}

int cmd_diagnose(const std::vector<std::string>& posterior_dirs, const std::string& out_path) {
    if (posterior_dirs.empty()) throw std::invalid_argument("diagnose: need at least one posterior");
    std::vector<std::string> names;
    std::vector<std::vector<std::vector<double>>> by_param;
    for (const auto& dir : posterior_dirs) {
        auto loaded = load_posterior(dir);
        if (names.empty()) {
            names = loaded.fit.param_names;
            by_param.resize(names.size());
        }
        if (loaded.fit.param_names != names)
            throw std::invalid_argument("diagnose: parameter sets differ between posteriors");
        for (const auto& ch : loaded.fit.chains) {
            for (std::size_t p = 0; p < names.size(); ++p) {
                std::vector<double> series;
                for (const auto& row : ch.rows) series.push_back(row[p]);
                by_param[p].push_back(std::move(series));
            }
        }
    }
    auto rep = diagnostics(names, by_param);
    if (rep.chains_truncated)
        std::cerr << "warning: chains had unequal lengths; truncated to the shortest\n";

    if (!out_path.empty()) {
        atomic_write(out_path, [&](std::ostream& o) {
            o << "parameter,rhat,flagged,acf1,acf5,acf10\n";
            o.precision(10);
            for (const auto& p : rep.params) {
                auto acf = [&](std::size_t l) { return l < p.autocorr.size() ? p.autocorr[l] : 0.0; };
                o << p.name << "," << p.rhat << "," << (p.flagged ? 1 : 0) << "," << acf(1) << ","
                  << acf(5) << "," << acf(10) << "\n";
            }
        });
    }
    for (const auto& p : rep.params)
        std::cout << p.name << ": rhat " << p.rhat << (p.flagged ? "  <-- above 1.1" : "") << "\n";
    return 0;
}

int cmd_scaling(const std::vector<std::size_t>& sizes, const std::string& out_path) {
    SpectralModel model{Family::squared_exponential, 100.0, {12.0}, 1.5, 1.0};
    auto rows = scaling_probe(
        sizes.empty() ? std::vector<std::size_t>{4096, 16384, 65536, 262144} : sizes, model);
    auto emit = [&](std::ostream& o) {
        o << "n,m_active,sec_likelihood_truncated,sec_likelihood_full,sec_sweep\n";
        o.precision(10);
        for (const auto& r : rows)
            o << r.n << "," << r.m_active << "," << r.sec_likelihood_truncated << ","
              << r.sec_likelihood_full << "," << r.sec_sweep << "\n";
    };
    if (!out_path.empty())
        atomic_write(out_path, emit);
    else
        emit(std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional Gaussian process toolkit"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, data_path, config_path, targets_path, out_path;
    std::string method = "stationary";
    std::uint64_t seed = 0;
    double split = 0.8;
    std::vector<std::string> posterior_dirs;
    std::vector<std::size_t> sizes;

    auto* sim = app.add_subcommand("simulate", "generate synthetic observations");
    sim->add_option("--spec", spec_path, "simulation spec (json)")->required();
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--seed", seed, "override the spec seed");

    auto* fit = app.add_subcommand("fit", "fit the stationary model");
    fit->add_option("--data", data_path, "observations csv");
    fit->add_option("--config", config_path, "run config (json)")->required();
    fit->add_option("--out", out_dir, "posterior output directory")->required();

    auto* fitns = app.add_subcommand("fit-ns", "fit the non-stationary mixture model");
    fitns->add_option("--data", data_path, "observations csv");
    fitns->add_option("--config", config_path, "run config (json)")->required();
    fitns->add_option("--out", out_dir, "posterior output directory")->required();

    auto* pred = app.add_subcommand("predict", "predict at new locations from a posterior");
    pred->add_option("--posterior", out_dir, "posterior directory")->required();
    pred->add_option("--targets", targets_path, "targets csv")->required();
    pred->add_option("--out", out_path, "output csv")->required();

    auto* cv = app.add_subcommand("cv", "hold-out cross-validation");
    cv->add_option("--data", data_path, "observations csv");
    cv->add_option("--config", config_path, "run config (json)")->required();
    cv->add_option("--split", split, "training fraction (default 0.8)");
    cv->add_option("--method", method, "stationary | nonstationary");
    cv->add_option("--out", out_dir, "report output directory");
    cv->add_option("--seed", seed, "split seed (defaults to the config seed)");

    auto* diag = app.add_subcommand("diagnose", "chain diagnostics from posterior directories");
    diag->add_option("--posterior", posterior_dirs, "posterior directories")->required();
    diag->add_option("--out", out_path, "diagnostics csv");

    auto* scal = app.add_subcommand("scaling", "runtime scaling probe");
    scal->add_option("--sizes", sizes, "1-D lattice sizes (ascending)");
    scal->add_option("--out", out_path, "output csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(spec_path, out_dir, seed);
        if (fit->parsed()) return cmd_fit(data_path, config_path, out_dir);
        if (fitns->parsed()) return cmd_fit_ns(data_path, config_path, out_dir);
        if (pred->parsed()) return cmd_predict(out_dir, targets_path, out_path);
        if (cv->parsed()) return cmd_cv(data_path, config_path, split, method, out_dir, seed);
        if (diag->parsed()) return cmd_diagnose(posterior_dirs, out_path);
        if (scal->parsed()) return cmd_scaling(sizes, out_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
