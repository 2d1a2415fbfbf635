#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fgp/spectral_diagonal.hpp"

namespace fgp {

/// Covariance between two points at the given lag, from the spectral sum
///   Cov = sum_l cos(omega_l . lag) g(omega_l) / n  (+ sigma2 when same_point).
/// Imaginary parts cancel by the negation symmetry of the active set; a
/// self-paired Nyquist coordinate stands for the +/- endpoint pair with the
/// mass split evenly, which the cosine realizes exactly.
inline double covariance_from_spectrum(const SpectralDiagonal& diag,
                                       std::span<const double> lag,
                                       bool same_point = false) {
    const std::size_t d = diag.lattice->dims();
    if (lag.size() != d) throw std::invalid_argument("covariance_from_spectrum: lag dimension mismatch");
    for (double x : lag)
        if (!std::isfinite(x)) throw std::invalid_argument("covariance_from_spectrum: non-finite lag");

    const double inv_n = 1.0 / static_cast<double>(diag.lattice->n_total());
    double acc = 0.0;
    for (std::size_t p = 0; p < diag.size(); ++p) {
        double phase = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            phase += diag.lattice->omega_component(diag.active[p], k) * lag[k];
        acc += diag.g[p] * std::cos(phase);
    }
    return acc * inv_n + (same_point ? diag.sigma2 : 0.0);
}

/// Dense covariance matrix Q G Q* + I sigma2 over a small set of locations,
/// materialized through the complex projection matrix; the real part is the
/// split-Nyquist covariance of covariance_from_spectrum.  Test oracle only.
inline Eigen::MatrixXd dense_covariance_oracle(const SpectralDiagonal& diag,
                                               const std::vector<std::vector<double>>& locations) {
    const std::size_t n_loc = locations.size();
    if (n_loc == 0) throw std::invalid_argument("dense_covariance_oracle: no locations");
    if (n_loc > 2048) throw std::invalid_argument("dense_covariance_oracle: location count exceeds guard of 2048");
    const std::size_t d = diag.lattice->dims();
    const std::size_t m = diag.size();
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(diag.lattice->n_total()));

    Eigen::MatrixXcd q(n_loc, m);
    for (std::size_t i = 0; i < n_loc; ++i) {
        if (locations[i].size() != d)
            throw std::invalid_argument("dense_covariance_oracle: location dimension mismatch");
        for (std::size_t p = 0; p < m; ++p) {
            double phase = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                phase += locations[i][k] * diag.lattice->omega_component(diag.active[p], k);
            q(i, p) = std::polar(inv_sqrt_n, phase);
        }
    }
    // per-entry sums with a fixed accumulation order, so permuting the
    // location list permutes the matrix bitwise
    Eigen::MatrixXd out(n_loc, n_loc);
    for (std::size_t i = 0; i < n_loc; ++i) {
        for (std::size_t j = i; j < n_loc; ++j) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t p = 0; p < m; ++p)
                acc += q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) * diag.g[p] *
                       std::conj(q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(p)));
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc.real();
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = acc.real();
        }
    }
    out.diagonal().array() += diag.sigma2;
    return out;
}

}  // namespace fgp
