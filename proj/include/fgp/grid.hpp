#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgp {

/// Multi-dimensional index helpers over a rectangular grid.
/// Linear ordering is row-major with the last dimension fastest.
struct GridShape {
    std::vector<std::size_t> extents;

    std::size_t dims() const { return extents.size(); }

    std::size_t total() const {
        std::size_t t = 1;
        for (auto e : extents) t *= e;
        return t;
    }

    std::size_t linear(const std::vector<std::size_t>& idx) const {
        std::size_t lin = 0;
        for (std::size_t k = 0; k < extents.size(); ++k) lin = lin * extents[k] + idx[k];
        return lin;
    }

    std::vector<std::size_t> unravel(std::size_t lin) const {
        std::vector<std::size_t> idx(extents.size());
        for (std::size_t k = extents.size(); k-- > 0;) {
            idx[k] = lin % extents[k];
            lin /= extents[k];
        }
        return idx;
    }

    bool operator==(const GridShape&) const = default;
};

/// Fixed symmetric frequency support.
///
/// Per dimension k the retained signed indices are the DFT band
///   j in {-floor(m_k/2), ..., ceil(m_k/2) - 1},
/// with frequency omega = j * (2*delta_k / n_k).  For m_k = n_k this is the
/// full DFT index set of the embedding lattice, where the band edge
/// j = -n_k/2 (even n_k) is the Nyquist frequency, identified with +n_k/2 and
/// self-paired under negation.  For even m_k < n_k the edge index -m_k/2 has
/// no negation partner inside the band; it is flagged so downstream code can
/// exclude it from fold-symmetric active sets.
class FrequencyLattice {
public:
    FrequencyLattice(std::vector<std::size_t> n_dims,
                     std::vector<std::size_t> m_dims,
                     std::vector<double> deltas = {}) {
        if (n_dims.empty()) throw std::invalid_argument("frequency lattice: empty dimension list");
        if (deltas.empty()) deltas.assign(n_dims.size(), std::numbers::pi);
        if (m_dims.size() != n_dims.size() || deltas.size() != n_dims.size())
            throw std::invalid_argument("frequency lattice: dimension count mismatch between n, m, delta");
        for (std::size_t k = 0; k < n_dims.size(); ++k) {
            if (n_dims[k] == 0 || m_dims[k] == 0)
                throw std::invalid_argument("frequency lattice: zero extent in dimension " + std::to_string(k));
            if (m_dims[k] > n_dims[k])
                throw std::invalid_argument("frequency lattice: m exceeds n in dimension " + std::to_string(k));
            if (!(deltas[k] > 0.0) || !std::isfinite(deltas[k]))
                throw std::invalid_argument("frequency lattice: delta must be positive and finite");
        }
        n_ = std::move(n_dims);
        m_ = std::move(m_dims);
        delta_ = std::move(deltas);

        band_.resize(dims());
        for (std::size_t k = 0; k < dims(); ++k) {
            const long m = static_cast<long>(m_[k]);
            band_[k].reserve(m_[k]);
            for (long j = -(m / 2); j < (m + 1) / 2; ++j) band_[k].push_back(j);
        }
    }

    std::size_t dims() const { return n_.size(); }
    const std::vector<std::size_t>& n_dims() const { return n_; }
    const std::vector<std::size_t>& m_dims() const { return m_; }
    const std::vector<double>& deltas() const { return delta_; }

    /// Lattice size n = prod n_k.
    std::size_t n_total() const {
        std::size_t t = 1;
        for (auto e : n_) t *= e;
        return t;
    }

    /// Band size m = prod m_k (number of retained coordinates).
    std::size_t m_total() const {
        std::size_t t = 1;
        for (auto e : m_) t *= e;
        return t;
    }

    GridShape field_shape() const { return GridShape{n_}; }
    GridShape band_shape() const { return GridShape{m_}; }

    /// Signed per-dimension index of coordinate l (band linear order).
    long signed_index(std::size_t l, std::size_t k) const {
        return band_[k][band_multi(l)[k]];
    }

    std::vector<long> signed_indices(std::size_t l) const {
        auto mi = band_multi(l);
        std::vector<long> j(dims());
        for (std::size_t k = 0; k < dims(); ++k) j[k] = band_[k][mi[k]];
        return j;
    }

    /// Frequency coordinate omega_l (radians per location unit).
    std::vector<double> omega(std::size_t l) const {
        auto j = signed_indices(l);
        std::vector<double> w(dims());
        for (std::size_t k = 0; k < dims(); ++k) w[k] = freq_of(k, j[k]);
        return w;
    }

    double omega_component(std::size_t l, std::size_t k) const {
        return freq_of(k, signed_index(l, k));
    }

    double freq_of(std::size_t k, long j) const {
        return static_cast<double>(j) * 2.0 * delta_[k] / static_cast<double>(n_[k]);
    }

    /// DFT grid index (mod n_k) of coordinate l along dimension k.
    std::size_t grid_index(std::size_t l, std::size_t k) const {
        long j = signed_index(l, k);
        const long n = static_cast<long>(n_[k]);
        return static_cast<std::size_t>(((j % n) + n) % n);
    }

    /// Linear index into the full n-grid of coordinate l's DFT position.
    std::size_t grid_linear(std::size_t l) const {
        std::size_t lin = 0;
        for (std::size_t k = 0; k < dims(); ++k) lin = lin * n_[k] + grid_index(l, k);
        return lin;
    }

    /// Band-local negation partner of l, or m_total() if l is unpaired
    /// (an even sub-band edge, see class comment).  Self-paired coordinates
    /// (zero frequency and full-band Nyquist) return l itself.
    std::size_t fold_partner(std::size_t l) const {
        auto mi = band_multi(l);
        std::vector<std::size_t> partner(dims());
        for (std::size_t k = 0; k < dims(); ++k) {
            const long j = band_[k][mi[k]];
            long nj;
            if (j == 0) {
                nj = 0;
            } else if (m_[k] == n_[k] && n_[k] % 2 == 0 && j == -static_cast<long>(n_[k] / 2)) {
                nj = j;  // Nyquist: -n/2 == +n/2 mod n
            } else if (-j >= band_[k].front() && -j <= band_[k].back()) {
                nj = -j;
            } else {
                return m_total();  // unpaired band edge
            }
            partner[k] = static_cast<std::size_t>(nj - band_[k].front());
        }
        return band_shape().linear(partner);
    }

    bool is_self_paired(std::size_t l) const { return fold_partner(l) == l; }
    bool is_unpaired(std::size_t l) const { return fold_partner(l) == m_total(); }

    /// True when every retained coordinate has its negation in the set
    /// (modulo the DFT identification of the full-band Nyquist edge).
    bool fold_closed() const {
        for (std::size_t k = 0; k < dims(); ++k)
            if (m_[k] % 2 == 0 && m_[k] < n_[k]) return false;
        return true;
    }

private:
    std::vector<std::size_t> band_multi(std::size_t l) const {
        if (l >= m_total()) throw std::out_of_range("frequency coordinate index out of range");
        return band_shape().unravel(l);
    }

    std::vector<std::size_t> n_, m_;
    std::vector<double> delta_;
    std::vector<std::vector<long>> band_;
};

inline FrequencyLattice build_frequency_lattice(std::vector<std::size_t> n_dims,
                                                std::vector<std::size_t> m_dims,
                                                std::vector<double> deltas = {}) {
    return FrequencyLattice(std::move(n_dims), std::move(m_dims), std::move(deltas));
}

}  // namespace fgp
