#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fgp/embed.hpp"

namespace fgp {

/// Polynomial trend fitted by ordinary least squares: intercept plus, per
/// coordinate, first and second order terms up to the requested degree.
struct TrendFit {
    std::vector<int> degree;      // per coordinate, 0..2
    std::vector<double> beta;     // intercept, then per-dim terms in order

    double value(std::span<const double> coord) const {
        double v = beta[0];
        std::size_t b = 1;
        for (std::size_t k = 0; k < degree.size(); ++k) {
            double x = coord[k];
            if (degree[k] >= 1) v += beta[b++] * x;
            if (degree[k] >= 2) v += beta[b++] * x * x;
        }
        return v;
    }
};

inline std::pair<ObservationSet, TrendFit> detrend(const ObservationSet& obs,
                                                   const std::vector<int>& degree) {
    obs.validate();
    if (degree.size() != obs.dims) throw std::invalid_argument("detrend: degree per coordinate required");
    for (int d : degree)
        if (d < 0 || d > 2) throw std::invalid_argument("detrend: degrees 0..2 supported");

    std::size_t cols = 1;
    for (int d : degree) cols += static_cast<std::size_t>(d);
    const std::size_t n = obs.size();
    if (n < cols) throw std::invalid_argument("detrend: fewer observations than trend coefficients");

    Eigen::MatrixXd x(n, cols);
    Eigen::VectorXd yv(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(static_cast<Eigen::Index>(i), 0) = 1.0;
        std::size_t b = 1;
        for (std::size_t k = 0; k < obs.dims; ++k) {
            const double c = obs.coords[i * obs.dims + k];
            if (degree[k] >= 1) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b++)) = c;
            if (degree[k] >= 2) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b++)) = c * c;
        }
        yv(static_cast<Eigen::Index>(i)) = obs.values[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < static_cast<Eigen::Index>(cols))
        throw std::invalid_argument("detrend: rank-deficient design matrix");
    Eigen::VectorXd beta = qr.solve(yv);

    TrendFit fit;
    fit.degree = degree;
    fit.beta.assign(beta.data(), beta.data() + beta.size());

    ObservationSet resid = obs;
    for (std::size_t i = 0; i < n; ++i)
        resid.values[i] -= fit.value(std::span<const double>(obs.coords.data() + i * obs.dims, obs.dims));
    return {std::move(resid), std::move(fit)};
}

}  // namespace fgp
