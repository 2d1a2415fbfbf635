#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "fgp/embed.hpp"
#include "fgp/mixture.hpp"
#include "fgp/stationary.hpp"

namespace fgp {

/// Writes via a temporary file in the same directory and renames into
/// place, so interrupted runs never leave a partial final file.
inline void atomic_write(const std::filesystem::path& path,
                         const std::function<void(std::ostream&)>& writer) {
    auto tmp = path;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        writer(out);
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_number(const std::string& s, std::size_t line_no, const std::string& column) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    double v = 0.0;
    auto [p, ec] = std::from_chars(b, e, v);
    while (p < e && (*p == ' ' || *p == '\t')) ++p;
    if (ec != std::errc{} || p != e)
        throw std::invalid_argument("csv line " + std::to_string(line_no) + ": cannot parse '" + s +
                                    "' in column " + column);
    return v;
}

}  // namespace detail

/// Parses observation CSV: named coordinate columns, one value column and an
/// optional per-observation noise-variance column.  Non-finite rows are
/// rejected with their line number.
inline ObservationSet ingest_csv(const std::filesystem::path& path,
                                 const std::vector<std::string>& coord_columns,
                                 const std::string& value_column,
                                 const std::string& noise_column = "") {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open data file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty data file: " + path.string());
    auto header = detail::split_csv_line(line);
    auto col_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::invalid_argument("missing column '" + name + "' in " + path.string());
    };
    std::vector<std::size_t> coord_idx;
    for (const auto& c : coord_columns) coord_idx.push_back(col_of(c));
    const std::size_t value_idx = col_of(value_column);
    const bool has_noise = !noise_column.empty();
    const std::size_t noise_idx = has_noise ? col_of(noise_column) : 0;

    ObservationSet obs;
    obs.dims = coord_columns.size();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() < header.size())
            throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields");
        for (std::size_t k = 0; k < coord_idx.size(); ++k) {
            const double v = detail::parse_number(cells[coord_idx[k]], line_no, coord_columns[k]);
            if (!std::isfinite(v))
                throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                            ": non-finite coordinate");
            obs.coords.push_back(v);
        }
        const double v = detail::parse_number(cells[value_idx], line_no, value_column);
        if (!std::isfinite(v))
            throw std::invalid_argument("csv line " + std::to_string(line_no) + ": non-finite value");
        obs.values.push_back(v);
        if (has_noise) {
            const double w = detail::parse_number(cells[noise_idx], line_no, noise_column);
            if (!(w > 0.0))
                throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                            ": noise variance must be > 0");
            obs.noise_var.push_back(w);
        }
    }
    obs.validate();
    return obs;
}

/// Reads coordinate columns only (prediction targets).
inline std::vector<std::vector<double>> ingest_targets(const std::filesystem::path& path,
                                                       const std::vector<std::string>& coord_columns) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open targets file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty targets file: " + path.string());
    auto header = detail::split_csv_line(line);
    std::vector<std::size_t> coord_idx;
    for (const auto& c : coord_columns) {
        bool found = false;
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == c) {
                coord_idx.push_back(i);
                found = true;
                break;
            }
        if (!found) throw std::invalid_argument("missing column '" + c + "' in " + path.string());
    }
    std::vector<std::vector<double>> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        std::vector<double> row;
        for (std::size_t k = 0; k < coord_idx.size(); ++k) {
            const double v = detail::parse_number(cells.at(coord_idx[k]), line_no, coord_columns[k]);
            if (!std::isfinite(v))
                throw std::invalid_argument("targets line " + std::to_string(line_no) +
                                            ": non-finite coordinate");
            row.push_back(v);
        }
        out.push_back(std::move(row));
    }
    if (out.empty()) throw std::invalid_argument("no targets in " + path.string());
    return out;
}

inline void write_observations_csv(const std::filesystem::path& path, const ObservationSet& obs,
                                   const std::vector<std::string>& coord_columns,
                                   const std::string& value_column) {
    atomic_write(path, [&](std::ostream& out) {
        for (std::size_t k = 0; k < coord_columns.size(); ++k) out << coord_columns[k] << ",";
        out << value_column;
        if (!obs.noise_var.empty()) out << ",nu2";
        out << "\n";
        out.precision(17);
        for (std::size_t i = 0; i < obs.size(); ++i) {
            for (std::size_t k = 0; k < obs.dims; ++k) out << obs.coords[i * obs.dims + k] << ",";
            out << obs.values[i];
            if (!obs.noise_var.empty()) out << "," << obs.noise_var[i];
            out << "\n";
        }
    });
}

/// Grid dump, CSV flavor: a one-line shape header, then one value per line
/// with the last dimension fastest.
inline void write_lattice_csv(const std::filesystem::path& path, const LatticeField& field) {
    atomic_write(path, [&](std::ostream& out) {
        out << "shape";
        for (auto e : field.shape) out << "," << e;
        out << "\n";
        out.precision(17);
        for (double v : field.values) out << v << "\n";
    });
}

inline LatticeField read_lattice_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open lattice dump: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty lattice dump");
    auto cells = detail::split_csv_line(line);
    if (cells.empty() || cells[0] != "shape")
        throw std::invalid_argument("lattice dump missing shape header");
    LatticeField field;
    for (std::size_t i = 1; i < cells.size(); ++i)
        field.shape.push_back(static_cast<std::size_t>(detail::parse_number(cells[i], 1, "shape")));
    const std::size_t total = GridShape{field.shape}.total();
    field.values.reserve(total);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        field.values.push_back(detail::parse_number(line, line_no, "value"));
    }
    if (field.values.size() != total)
        throw std::invalid_argument("lattice dump value count does not match the shape");
    return field;
}

/// Grid dump, binary flavor: magic, dimension count, extents, doubles.
inline void write_lattice_binary(const std::filesystem::path& path, const LatticeField& field) {
    atomic_write(path, [&](std::ostream& out) {
        const char magic[8] = {'F', 'G', 'P', 'L', 'A', 'T', '0', '1'};
        out.write(magic, 8);
        const std::uint64_t d = field.shape.size();
        out.write(reinterpret_cast<const char*>(&d), 8);
        for (auto e : field.shape) {
            const std::uint64_t v = e;
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
        out.write(reinterpret_cast<const char*>(field.values.data()),
                  static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    });
}

inline LatticeField read_lattice_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open lattice dump: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "FGPLAT01")
        throw std::invalid_argument("bad lattice dump magic in " + path.string());
    std::uint64_t d = 0;
    in.read(reinterpret_cast<char*>(&d), 8);
    LatticeField field;
    for (std::uint64_t k = 0; k < d; ++k) {
        std::uint64_t e = 0;
        in.read(reinterpret_cast<char*>(&e), 8);
        field.shape.push_back(static_cast<std::size_t>(e));
    }
    field.values.resize(GridShape{field.shape}.total());
    in.read(reinterpret_cast<char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    if (!in) throw std::invalid_argument("truncated lattice dump: " + path.string());
    return field;
}

/// Posterior directory layout:
///   meta.json    - lattice, support, affine map, trend, config echo
///   draws.csv    - chain, iteration, parameters, loglik
///   y_draws.bin  - per retained draw, the spectral vector
inline void save_posterior(const std::filesystem::path& dir, const PosteriorSummary& fit,
                           const SpectralDiagonal& support, const EmbeddedData& data,
                           const nlohmann::json& config_echo) {
    std::filesystem::create_directories(dir);

    nlohmann::json meta;
    meta["kind"] = "stationary";
    meta["lattice"] = {{"n_dims", support.lattice->n_dims()},
                       {"m_dims", support.lattice->m_dims()},
                       {"deltas", support.lattice->deltas()}};
    meta["active"] = support.active;
    meta["sigma2"] = support.sigma2;
    meta["eps_rel"] = support.eps_rel;
    meta["affine"] = {{"shape", data.shape}, {"scale", data.scale}, {"offset", data.offset}};
    meta["param_names"] = fit.param_names;
    meta["config"] = config_echo;
    atomic_write(dir / "meta.json", [&](std::ostream& out) { out << meta.dump(2) << "\n"; });

    atomic_write(dir / "draws.csv", [&](std::ostream& out) {
        out << "chain,iteration";
        for (const auto& n : fit.param_names) out << "," << n;
        out << ",loglik\n";
        out.precision(17);
        for (std::size_t ci = 0; ci < fit.chains.size(); ++ci) {
            const auto& ch = fit.chains[ci];
            for (std::size_t d = 0; d < ch.rows.size(); ++d) {
                out << ci << "," << ch.iteration[d];
                for (double v : ch.rows[d]) out << "," << v;
                out << "," << ch.loglik[d] << "\n";
            }
        }
    });

    atomic_write(dir / "y_draws.bin", [&](std::ostream& out) {
        const char magic[8] = {'F', 'G', 'P', 'Y', 'D', 'R', '0', '1'};
        out.write(magic, 8);
        std::uint64_t total = 0;
        for (const auto& ch : fit.chains) total += ch.y_draws.size();
        const std::uint64_t m = support.size();
        out.write(reinterpret_cast<const char*>(&total), 8);
        out.write(reinterpret_cast<const char*>(&m), 8);
        for (const auto& ch : fit.chains)
            for (const auto& y : ch.y_draws)
                out.write(reinterpret_cast<const char*>(y.data()),
                          static_cast<std::streamsize>(m * sizeof(std::complex<double>)));
    });
}

struct LoadedPosterior {
    nlohmann::json meta;
    SpectralDiagonal support;
    EmbeddedData data;  // affine map only (no observations)
    PosteriorSummary fit;
};

inline LoadedPosterior load_posterior(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in) throw std::invalid_argument("cannot open " + (dir / "meta.json").string());
    LoadedPosterior out;
    meta_in >> out.meta;

    auto lat = std::make_shared<FrequencyLattice>(
        out.meta.at("lattice").at("n_dims").get<std::vector<std::size_t>>(),
        out.meta.at("lattice").at("m_dims").get<std::vector<std::size_t>>(),
        out.meta.at("lattice").at("deltas").get<std::vector<double>>());
    out.support.lattice = lat;
    out.support.active = out.meta.at("active").get<std::vector<std::size_t>>();
    out.support.sigma2 = out.meta.value("sigma2", 1.0);
    out.support.eps_rel = out.meta.value("eps_rel", 0.0);
    out.support.g.assign(out.support.active.size(), 0.0);
    std::vector<std::size_t> pos_of(lat->m_total(), lat->m_total());
    for (std::size_t p = 0; p < out.support.active.size(); ++p) pos_of[out.support.active[p]] = p;
    out.support.partner.resize(out.support.active.size());
    out.support.self_paired.resize(out.support.active.size());
    for (std::size_t p = 0; p < out.support.active.size(); ++p) {
        const std::size_t mate = pos_of[lat->fold_partner(out.support.active[p])];
        out.support.partner[p] = mate;
        out.support.self_paired[p] = (mate == p) ? 1 : 0;
    }

    out.data.shape = out.meta.at("affine").at("shape").get<std::vector<std::size_t>>();
    out.data.scale = out.meta.at("affine").at("scale").get<std::vector<double>>();
    out.data.offset = out.meta.at("affine").at("offset").get<std::vector<double>>();

    out.fit.param_names = out.meta.at("param_names").get<std::vector<std::string>>();

    // draws.csv
    std::ifstream draws_in(dir / "draws.csv");
    if (!draws_in) throw std::invalid_argument("cannot open " + (dir / "draws.csv").string());
    std::string line;
    std::getline(draws_in, line);
    auto header = detail::split_csv_line(line);
    std::size_t line_no = 1;
    while (std::getline(draws_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        const std::size_t chain = static_cast<std::size_t>(detail::parse_number(cells[0], line_no, "chain"));
        while (out.fit.chains.size() <= chain) out.fit.chains.emplace_back();
        auto& ch = out.fit.chains[chain];
        ch.iteration.push_back(
            static_cast<std::size_t>(detail::parse_number(cells[1], line_no, "iteration")));
        std::vector<double> row;
        for (std::size_t i = 2; i + 1 < cells.size(); ++i)
            row.push_back(detail::parse_number(cells[i], line_no, header[i]));
        ch.loglik.push_back(detail::parse_number(cells.back(), line_no, "loglik"));
        ch.rows.push_back(std::move(row));
    }

    // rebuild per-draw models from the rows
    const auto& names = out.fit.param_names;
    SpectralModel proto;
    if (out.meta.contains("config") && out.meta["config"].contains("model"))
        proto = out.meta["config"]["model"].get<SpectralModel>();
    for (auto& ch : out.fit.chains) {
        for (const auto& row : ch.rows) {
            SpectralModel m = proto;
            std::vector<double> rho;
            double nu2 = 0.0, kappa = 0.0;
            for (std::size_t i = 0; i < names.size() && i < row.size(); ++i) {
                if (names[i] == "phi") m.phi = row[i];
                else if (names[i].rfind("rho", 0) == 0) rho.push_back(row[i]);
                else if (names[i] == "sigma2") m.sigma2 = row[i];
                else if (names[i] == "nu2") nu2 = row[i];
                else if (names[i] == "kappa_mis") kappa = row[i];
            }
            if (!rho.empty()) m.rho = rho;
            ch.models.push_back(m);
            ch.nu2.push_back(nu2);
            ch.kappa_mis.push_back(kappa);
        }
    }

    // y_draws.bin
    std::ifstream ybin(dir / "y_draws.bin", std::ios::binary);
    if (!ybin) throw std::invalid_argument("cannot open " + (dir / "y_draws.bin").string());
    char magic[8];
    ybin.read(magic, 8);
    if (!ybin || std::string(magic, 8) != "FGPYDR01")
        throw std::invalid_argument("bad y_draws magic");
    std::uint64_t total = 0, m = 0;
    ybin.read(reinterpret_cast<char*>(&total), 8);
    ybin.read(reinterpret_cast<char*>(&m), 8);
    if (m != out.support.size()) throw std::invalid_argument("y_draws support size mismatch");
    std::size_t chain = 0, within = 0;
    for (std::uint64_t i = 0; i < total; ++i) {
        while (chain < out.fit.chains.size() && within >= out.fit.chains[chain].rows.size()) {
            ++chain;
            within = 0;
        }
        if (chain >= out.fit.chains.size()) throw std::invalid_argument("y_draws count mismatch");
        SpectralVector y(m);
        ybin.read(reinterpret_cast<char*>(y.data()),
                  static_cast<std::streamsize>(m * sizeof(std::complex<double>)));
        out.fit.chains[chain].y_draws.push_back(std::move(y));
        ++within;
    }
    if (!ybin) throw std::invalid_argument("truncated y_draws.bin");
    return out;
}

/// Non-stationary posterior directory: ns_draws.csv (tidy, one row per draw
/// and component), snapshots.bin, plus field dumps written by the caller.
inline void save_ns_posterior(const std::filesystem::path& dir, const NsFitResult& fit,
                              const SpectralDiagonal& support, const EmbeddedData& data,
                              std::size_t k_max, const nlohmann::json& config_echo) {
    std::filesystem::create_directories(dir);

    nlohmann::json meta;
    meta["kind"] = "nonstationary";
    meta["lattice"] = {{"n_dims", support.lattice->n_dims()},
                       {"m_dims", support.lattice->m_dims()},
                       {"deltas", support.lattice->deltas()}};
    meta["active"] = support.active;
    meta["sigma2"] = support.sigma2;
    meta["eps_rel"] = support.eps_rel;
    meta["affine"] = {{"shape", data.shape}, {"scale", data.scale}, {"offset", data.offset}};
    meta["k_max"] = k_max;
    meta["occupancy_mean"] = fit.occupancy_mean;
    meta["dominating"] = fit.dominating;
    meta["config"] = config_echo;
    atomic_write(dir / "meta.json", [&](std::ostream& out) { out << meta.dump(2) << "\n"; });

    atomic_write(dir / "ns_draws.csv", [&](std::ostream& out) {
        out << "iteration,component,occupancy,phi,";
        const std::size_t n_rho = fit.comp_draws.empty() ? 1 : fit.comp_draws[0].theta_z.rho.size();
        for (std::size_t k = 0; k < n_rho; ++k) out << "rho" << (n_rho > 1 ? std::to_string(k + 1) : "") << ",";
        out << "sigma2,w_phi,";
        for (std::size_t k = 0; k < n_rho; ++k) out << "w_rho" << (n_rho > 1 ? std::to_string(k + 1) : "") << ",";
        out << "nu2\n";
        out.precision(17);
        for (const auto& d : fit.comp_draws) {
            out << d.iteration << "," << d.component << "," << d.occupancy << "," << d.theta_z.phi;
            for (double r : d.theta_z.rho) out << "," << r;
            out << "," << d.theta_z.sigma2 << "," << d.theta_m.phi;
            for (double r : d.theta_m.rho) out << "," << r;
            out << "," << d.nu2 << "\n";
        }
    });

    atomic_write(dir / "snapshots.bin", [&](std::ostream& out) {
        const char magic[8] = {'F', 'G', 'P', 'N', 'S', 'N', '0', '1'};
        out.write(magic, 8);
        const std::uint64_t count = fit.snapshots.size();
        const std::uint64_t m = support.size();
        out.write(reinterpret_cast<const char*>(&count), 8);
        out.write(reinterpret_cast<const char*>(&m), 8);
        for (const auto& snap : fit.snapshots) {
            const std::uint64_t kc = snap.zetas.size();
            out.write(reinterpret_cast<const char*>(&kc), 8);
            out.write(reinterpret_cast<const char*>(&snap.nu2), 8);
            out.write(reinterpret_cast<const char*>(snap.y.data()),
                      static_cast<std::streamsize>(m * sizeof(std::complex<double>)));
            for (std::uint64_t k = 0; k < kc; ++k) {
                nlohmann::json mj = snap.models_z[k];
                const std::string ms = mj.dump();
                const std::uint64_t len = ms.size();
                out.write(reinterpret_cast<const char*>(&len), 8);
                out.write(ms.data(), static_cast<std::streamsize>(len));
                out.write(reinterpret_cast<const char*>(snap.zetas[k].data()),
                          static_cast<std::streamsize>(m * sizeof(std::complex<double>)));
            }
        }
    });
}

struct LoadedNsPosterior {
    nlohmann::json meta;
    SpectralDiagonal support;
    EmbeddedData data;
    std::vector<NsSnapshot> snapshots;
    std::size_t k_max = 32;
};

inline LoadedNsPosterior load_ns_posterior(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in) throw std::invalid_argument("cannot open " + (dir / "meta.json").string());
    LoadedNsPosterior out;
    meta_in >> out.meta;
    out.k_max = out.meta.value("k_max", std::size_t{32});

    auto lat = std::make_shared<FrequencyLattice>(
        out.meta.at("lattice").at("n_dims").get<std::vector<std::size_t>>(),
        out.meta.at("lattice").at("m_dims").get<std::vector<std::size_t>>(),
        out.meta.at("lattice").at("deltas").get<std::vector<double>>());
    out.support.lattice = lat;
    out.support.active = out.meta.at("active").get<std::vector<std::size_t>>();
    out.support.g.assign(out.support.active.size(), 0.0);
    std::vector<std::size_t> pos_of(lat->m_total(), lat->m_total());
    for (std::size_t p = 0; p < out.support.active.size(); ++p) pos_of[out.support.active[p]] = p;
    out.support.partner.resize(out.support.active.size());
    out.support.self_paired.resize(out.support.active.size());
    for (std::size_t p = 0; p < out.support.active.size(); ++p) {
        const std::size_t mate = pos_of[lat->fold_partner(out.support.active[p])];
        out.support.partner[p] = mate;
        out.support.self_paired[p] = (mate == p) ? 1 : 0;
    }
    out.data.shape = out.meta.at("affine").at("shape").get<std::vector<std::size_t>>();
    out.data.scale = out.meta.at("affine").at("scale").get<std::vector<double>>();
    out.data.offset = out.meta.at("affine").at("offset").get<std::vector<double>>();

    std::ifstream in(dir / "snapshots.bin", std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + (dir / "snapshots.bin").string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "FGPNSN01") throw std::invalid_argument("bad snapshots magic");
    std::uint64_t count = 0, m = 0;
    in.read(reinterpret_cast<char*>(&count), 8);
    in.read(reinterpret_cast<char*>(&m), 8);
    for (std::uint64_t i = 0; i < count; ++i) {
        NsSnapshot snap;
        std::uint64_t kc = 0;
        in.read(reinterpret_cast<char*>(&kc), 8);
        in.read(reinterpret_cast<char*>(&snap.nu2), 8);
        snap.y.resize(m);
        in.read(reinterpret_cast<char*>(snap.y.data()),
                static_cast<std::streamsize>(m * sizeof(std::complex<double>)));
        for (std::uint64_t k = 0; k < kc; ++k) {
            std::uint64_t len = 0;
            in.read(reinterpret_cast<char*>(&len), 8);
            std::string ms(len, '\0');
            in.read(ms.data(), static_cast<std::streamsize>(len));
            snap.models_z.push_back(nlohmann::json::parse(ms).get<SpectralModel>());
            SpectralVector zeta(m);
            in.read(reinterpret_cast<char*>(zeta.data()),
                    static_cast<std::streamsize>(m * sizeof(std::complex<double>)));
            snap.zetas.push_back(std::move(zeta));
        }
        out.snapshots.push_back(std::move(snap));
    }
    if (!in) throw std::invalid_argument("truncated snapshots.bin");
    return out;
}

}  // namespace fgp
