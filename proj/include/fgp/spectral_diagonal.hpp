#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fgp/grid.hpp"
#include "fgp/spectral_model.hpp"

namespace fgp {

/// The retained diagonal of G over an active subset of the frequency
/// lattice, closed under negation.  Also carries the nugget so that
/// downstream covariance/likelihood code has the full (G, sigma2) pair.
struct SpectralDiagonal {
    std::shared_ptr<const FrequencyLattice> lattice;
    std::vector<std::size_t> active;      // band-linear coordinate indices
    std::vector<double> g;                // g(omega_l) per active entry
    std::vector<std::size_t> partner;     // position in `active` of -omega
    std::vector<std::uint8_t> self_paired;
    double sigma2 = 0.0;
    double eps_rel = 0.0;

    std::size_t size() const { return active.size(); }
    std::size_t n_total() const { return lattice->n_total(); }

    /// Fraction of the full lattice retained (active count / n).
    double active_fraction() const {
        return static_cast<double>(active.size()) / static_cast<double>(lattice->n_total());
    }

    /// Fraction prod(m_k)/prod(n_k) of the smallest symmetric per-dimension
    /// band enclosing the active set.  This is the sparsity in the band
    /// product sense (m = m_1 ... m_d).
    double band_fraction() const {
        if (active.empty()) return 0.0;
        const std::size_t d = lattice->dims();
        std::vector<long> maxabs(d, 0);
        for (std::size_t l : active) {
            for (std::size_t k = 0; k < d; ++k) {
                long j = std::labs(lattice->signed_index(l, k));
                if (j > maxabs[k]) maxabs[k] = j;
            }
        }
        double f = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double nk = static_cast<double>(lattice->n_dims()[k]);
            const double band = std::min(nk, static_cast<double>(2 * maxabs[k] + 1));
            f *= band / nk;
        }
        return f;
    }

    std::vector<double> omega(std::size_t pos) const { return lattice->omega(active[pos]); }
};

/// Retains exactly the coordinates with g(omega_l) >= eps_rel * sigma2.
/// Unpaired band-edge coordinates (even m_k < n_k) are excluded so the
/// active set stays closed under negation.
inline SpectralDiagonal truncate_spectrum(const SpectralModel& model,
                                          std::shared_ptr<const FrequencyLattice> lattice,
                                          double eps_rel) {
    model.validate();
    if (!(eps_rel >= 0.0)) throw std::invalid_argument("truncate_spectrum: eps_rel must be >= 0");

    const std::size_t m = lattice->m_total();
    const double thresh = eps_rel * model.sigma2;

    std::vector<std::size_t> active;
    std::vector<double> gvals;
    std::vector<std::size_t> pos_of(m, m);  // band index -> position in active
    active.reserve(m);
    gvals.reserve(m);
    for (std::size_t l = 0; l < m; ++l) {
        if (lattice->is_unpaired(l)) continue;
        auto w = lattice->omega(l);
        const double g = model.spectral_density(w);
        if (g >= thresh) {
            pos_of[l] = active.size();
            active.push_back(l);
            gvals.push_back(g);
        }
    }
    if (active.empty())
        throw std::runtime_error(
            "truncate_spectrum: empty active set; the spectrum is negligible against the nugget "
            "everywhere on the lattice (consider rescaling locations)");

    SpectralDiagonal diag;
    diag.lattice = std::move(lattice);
    diag.sigma2 = model.sigma2;
    diag.eps_rel = eps_rel;
    diag.partner.resize(active.size());
    diag.self_paired.resize(active.size());
    for (std::size_t p = 0; p < active.size(); ++p) {
        const std::size_t mate = diag.lattice->fold_partner(active[p]);
        const std::size_t mate_pos = pos_of[mate];
        if (mate_pos >= active.size())
            throw std::logic_error("truncate_spectrum: active set not closed under negation");
        diag.partner[p] = mate_pos;
        diag.self_paired[p] = (mate_pos == p) ? 1 : 0;
    }
    diag.active = std::move(active);
    diag.g = std::move(gvals);
    return diag;
}

/// Convenience: full (untruncated) diagonal for a model on a lattice.
inline SpectralDiagonal full_spectrum(const SpectralModel& model,
                                      std::shared_ptr<const FrequencyLattice> lattice) {
    return truncate_spectrum(model, std::move(lattice), 0.0);
}

}  // namespace fgp
