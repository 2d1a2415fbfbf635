#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>
#include <Eigen/Dense>

#include "fgp/spectral_diagonal.hpp"

namespace fgp {

/// Real-valued array over the embedding lattice, last dimension fastest.
struct LatticeField {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    LatticeField() = default;
    explicit LatticeField(std::vector<std::size_t> s, double fill = 0.0)
        : shape(std::move(s)), values(GridShape{shape}.total(), fill) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Complex coefficients over the active frequencies of a SpectralDiagonal,
/// in the diagonal's active order.  Fold symmetry (coefficient at -omega is
/// the conjugate of the one at omega) is the representation invariant.
using SpectralVector = std::vector<std::complex<double>>;

namespace detail {

struct FftwBuffer {
    fftw_complex* p = nullptr;
    explicit FftwBuffer(std::size_t n) {
        p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        if (!p) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(p); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

/// Plans are cached per (shape, sign); execution on fresh fftw_malloc'd
/// buffers via the new-array interface is thread-safe.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    fftw_plan get(const std::vector<std::size_t>& shape, int sign) {
        std::lock_guard<std::mutex> lk(mu_);
        auto key = std::make_pair(shape, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::size_t total = 1;
        for (auto e : shape) total *= e;
        auto in = std::make_unique<FftwBuffer>(total);
        auto out = std::make_unique<FftwBuffer>(total);
        std::vector<int> dims(shape.begin(), shape.end());
        fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), in->p, out->p,
                                       sign, FFTW_ESTIMATE);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
        keepalive_.push_back(std::move(in));
        keepalive_.push_back(std::move(out));
        plans_.emplace(std::move(key), plan);
        return plan;
    }

private:
    PlanCache() = default;
    std::mutex mu_;
    std::map<std::pair<std::vector<std::size_t>, int>, fftw_plan> plans_;
    std::vector<std::unique_ptr<FftwBuffer>> keepalive_;
};

inline void execute_dft(const std::vector<std::size_t>& shape, int sign,
                        const std::vector<std::complex<double>>& in,
                        std::vector<std::complex<double>>& out) {
    fftw_plan plan = PlanCache::instance().get(shape, sign);
    FftwBuffer bin(in.size()), bout(in.size());
    std::copy(in.begin(), in.end(), reinterpret_cast<std::complex<double>*>(bin.p));
    fftw_execute_dft(plan, bin.p, bout.p);
    out.assign(reinterpret_cast<std::complex<double>*>(bout.p),
               reinterpret_cast<std::complex<double>*>(bout.p) + in.size());
}

/// Phase exp(s0 * i * sum_k omega_{l,k}) accounting for the lattice sites
/// starting at (1,...,1) rather than (0,...,0).
inline std::complex<double> origin_phase(const SpectralDiagonal& diag, std::size_t pos, double sign) {
    double ph = 0.0;
    const std::size_t d = diag.lattice->dims();
    for (std::size_t k = 0; k < d; ++k) ph += diag.lattice->omega_component(diag.active[pos], k);
    return std::polar(1.0, sign * ph);
}

}  // namespace detail

/// (Q*Z)_l = sum_{s in {1..n}^d} exp(-i s.omega_l) Z_s / sqrt(n), for the
/// active coordinates of `diag`.  FFT-backed, O(n log2 n).
inline SpectralVector forward_transform(const LatticeField& field, const SpectralDiagonal& diag) {
    if (field.shape != diag.lattice->n_dims())
        throw std::invalid_argument("forward_transform: field shape does not match lattice");
    const std::size_t n = field.size();
    std::vector<std::complex<double>> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = field.values[i];
    std::vector<std::complex<double>> out;
    detail::execute_dft(field.shape, FFTW_FORWARD, in, out);

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    SpectralVector coeffs(diag.size());
    for (std::size_t p = 0; p < diag.size(); ++p)
        coeffs[p] = out[diag.lattice->grid_linear(diag.active[p])] *
                    detail::origin_phase(diag, p, -1.0) * inv_sqrt_n;
    return coeffs;
}

/// Field_s = Re sum_l exp(+i s.omega_l) c_l / sqrt(n) over the lattice, with
/// dropped frequencies implicitly zero.  Errors when the coefficients break
/// fold symmetry (imaginary residual above 1e-8 of the field norm).
inline LatticeField inverse_transform(const SpectralVector& coeffs, const SpectralDiagonal& diag) {
    if (coeffs.size() != diag.size())
        throw std::invalid_argument("inverse_transform: coefficient count does not match active set");
    const auto& shape = diag.lattice->n_dims();
    const std::size_t n = diag.lattice->n_total();
    std::vector<std::complex<double>> in(n, {0.0, 0.0});
    for (std::size_t p = 0; p < diag.size(); ++p)
        in[diag.lattice->grid_linear(diag.active[p])] += coeffs[p] * detail::origin_phase(diag, p, +1.0);
    std::vector<std::complex<double>> out;
    detail::execute_dft(shape, FFTW_BACKWARD, in, out);

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    LatticeField field(shape);
    double max_imag = 0.0, max_real = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        field.values[i] = out[i].real() * inv_sqrt_n;
        max_imag = std::max(max_imag, std::abs(out[i].imag() * inv_sqrt_n));
        max_real = std::max(max_real, std::abs(field.values[i]));
    }
    if (max_imag > 1e-8 * std::max(max_real, 1e-300))
        throw std::runtime_error("inverse_transform: fold-symmetry violation (imaginary residual " +
                                 std::to_string(max_imag) + ")");
    return field;
}

/// Row-by-row projection Q_s c at arbitrary locations.  Per-dimension phase
/// tables factorize exp(i s.omega_l) over the Cartesian frequency grid, so a
/// location costs O(m) complex multiplies and no transcendental calls.
class OffsiteProjector {
public:
    explicit OffsiteProjector(const SpectralDiagonal& diag) : diag_(&diag) {}

    double project(const SpectralVector& coeffs, std::span<const double> location) const {
        const auto& lat = *diag_->lattice;
        const std::size_t d = lat.dims();
        if (location.size() != d) throw std::invalid_argument("project_offsite: location dimension mismatch");
        for (double x : location)
            if (!std::isfinite(x)) throw std::invalid_argument("project_offsite: non-finite coordinate");
        if (coeffs.size() != diag_->size())
            throw std::invalid_argument("project_offsite: coefficient count mismatch");

        // per-dimension tables over the band indices
        tables_.resize(d);
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t mk = lat.m_dims()[k];
            tables_[k].resize(mk);
            const long lo = -static_cast<long>(mk / 2);
            for (std::size_t t = 0; t < mk; ++t) {
                const double w = lat.freq_of(k, lo + static_cast<long>(t));
                tables_[k][t] = std::polar(1.0, location[k] * w);
            }
        }
        const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(lat.n_total()));
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t p = 0; p < diag_->size(); ++p) {
            std::complex<double> e{1.0, 0.0};
            for (std::size_t k = 0; k < d; ++k) {
                const long lo = -static_cast<long>(lat.m_dims()[k] / 2);
                e *= tables_[k][static_cast<std::size_t>(lat.signed_index(diag_->active[p], k) - lo)];
            }
            acc += coeffs[p] * e;
        }
        return acc.real() * inv_sqrt_n;
    }

private:
    const SpectralDiagonal* diag_;
    mutable std::vector<std::vector<std::complex<double>>> tables_;
};

inline std::vector<double> project_offsite(const SpectralVector& coeffs, const SpectralDiagonal& diag,
                                           const std::vector<std::vector<double>>& locations) {
    OffsiteProjector proj(diag);
    std::vector<double> out(locations.size());
    for (std::size_t i = 0; i < locations.size(); ++i) out[i] = proj.project(coeffs, locations[i]);
    return out;
}

struct OrthogonalityReport {
    double max_dev_qhq = 0.0;   // ||Q*Q - I||_max
    double max_dev_qqh = 0.0;   // ||QQ* - I||_max, only meaningful when m = n
    bool square = false;
};

/// Verifies Theorem-4 style orthogonality of the projection matrix on the
/// integer lattice at the lattice's own frequencies.  Dense check, n <= 4096.
inline OrthogonalityReport orthogonality_check(const FrequencyLattice& lattice) {
    const std::size_t n = lattice.n_total();
    const std::size_t m = lattice.m_total();
    if (n > 4096) throw std::invalid_argument("orthogonality_check: lattice size exceeds guard of 4096");

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    GridShape fieldshape{lattice.n_dims()};
    Eigen::MatrixXcd q(n, m);
    for (std::size_t s = 0; s < n; ++s) {
        auto site = fieldshape.unravel(s);
        for (std::size_t l = 0; l < m; ++l) {
            double phase = 0.0;
            for (std::size_t k = 0; k < lattice.dims(); ++k)
                phase += static_cast<double>(site[k] + 1) * lattice.omega_component(l, k);
            q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(l)) = std::polar(inv_sqrt_n, phase);
        }
    }
    OrthogonalityReport rep;
    Eigen::MatrixXcd qhq = q.adjoint() * q;
    rep.max_dev_qhq = (qhq - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff();
    if (m == n) {
        rep.square = true;
        Eigen::MatrixXcd qqh = q * q.adjoint();
        rep.max_dev_qqh = (qqh - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    }
    return rep;
}

}  // namespace fgp
