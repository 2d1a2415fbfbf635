#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgp/grid.hpp"

namespace fgp {

/// Irregularly located observations in original coordinates.
struct ObservationSet {
    std::size_t dims = 0;
    std::vector<double> coords;   // flat, row i at [i*dims, (i+1)*dims)
    std::vector<double> values;
    std::vector<double> noise_var;  // optional per-observation nu_i^2; empty = shared

    std::size_t size() const { return values.size(); }

    std::vector<double> coord(std::size_t i) const {
        return {coords.begin() + static_cast<long>(i * dims),
                coords.begin() + static_cast<long>((i + 1) * dims)};
    }

    void validate() const {
        if (values.empty()) throw std::invalid_argument("observation set: empty");
        if (dims == 0 || coords.size() != values.size() * dims)
            throw std::invalid_argument("observation set: coordinate/value count mismatch");
        for (double c : coords)
            if (!std::isfinite(c)) throw std::invalid_argument("observation set: non-finite coordinate");
        if (!noise_var.empty()) {
            if (noise_var.size() != values.size())
                throw std::invalid_argument("observation set: noise variance count mismatch");
            for (double v : noise_var)
                if (!(v > 0.0)) throw std::invalid_argument("observation set: noise variances must be > 0");
        }
    }
};

enum class EmbedMode { strict, misaligned };

/// Observations mapped onto the integer embedding lattice: the affine
/// coordinate map, one cell per observation, per-observation distance to the
/// cell (zero in strict mode), and the per-cell observation lists.
struct EmbeddedData {
    std::vector<std::size_t> shape;
    std::vector<double> scale;    // original units per lattice step, per dim
    std::vector<double> offset;   // original coordinate of lattice site (1,...,1)
    std::vector<std::size_t> cell_of_obs;   // linear cell index per observation
    std::vector<double> distance;           // original-unit distance to the cell site
    std::vector<std::size_t> observed_cells;         // sorted unique
    std::vector<std::vector<std::size_t>> cell_obs;  // parallel to observed_cells

    std::size_t n_total() const { return GridShape{shape}.total(); }

    /// Original-unit coordinates of a lattice cell (integer site).
    std::vector<double> cell_site(std::size_t linear) const {
        auto idx = GridShape{shape}.unravel(linear);
        std::vector<double> s(shape.size());
        for (std::size_t k = 0; k < shape.size(); ++k)
            s[k] = offset[k] + static_cast<double>(idx[k] + 1) * scale[k];
        return s;
    }

    /// Lattice-unit coordinates (sites are (1,...,1)-based integers).
    std::vector<double> cell_lattice_coord(std::size_t linear) const {
        auto idx = GridShape{shape}.unravel(linear);
        std::vector<double> s(shape.size());
        for (std::size_t k = 0; k < shape.size(); ++k) s[k] = static_cast<double>(idx[k] + 1);
        return s;
    }

    /// Map an original-unit point into lattice units (for prediction targets).
    std::vector<double> to_lattice_units(std::span<const double> x) const {
        std::vector<double> u(shape.size());
        for (std::size_t k = 0; k < shape.size(); ++k) u[k] = (x[k] - offset[k]) / scale[k] + 1.0;
        return u;
    }
};

namespace detail {

inline double float_gcd(double a, double b, double tol) {
    a = std::abs(a);
    b = std::abs(b);
    while (b > tol) {
        double r = std::fmod(a, b);
        // snap near-multiples so accumulated rounding does not shrink the gcd
        if (r > b - tol) r = 0.0;
        a = b;
        b = r;
    }
    return a;
}

}  // namespace detail

/// Maps observations onto the embedding lattice.
///
/// strict: coordinates are divided by the per-dimension GCD of coordinate
/// differences and shifted so the smallest site is (1,...,1); every
/// observation must land exactly on a lattice site (tolerance 1e-9).
///
/// misaligned: a target shape is required; each observation is assigned to
/// the nearest lattice cell (ties toward the smaller cell index) and the
/// distance is recorded for the inflated noise model.
inline EmbeddedData embed(const ObservationSet& obs, EmbedMode mode,
                          std::optional<std::vector<std::size_t>> target_shape = std::nullopt,
                          double tol = 1e-9) {
    obs.validate();
    const std::size_t d = obs.dims;
    const std::size_t n_obs = obs.size();

    EmbeddedData out;
    out.scale.assign(d, 1.0);
    out.offset.assign(d, 0.0);
    out.cell_of_obs.resize(n_obs);
    out.distance.assign(n_obs, 0.0);

    std::vector<double> mins(d), maxs(d);
    for (std::size_t k = 0; k < d; ++k) {
        mins[k] = maxs[k] = obs.coords[k];
        for (std::size_t i = 1; i < n_obs; ++i) {
            mins[k] = std::min(mins[k], obs.coords[i * d + k]);
            maxs[k] = std::max(maxs[k], obs.coords[i * d + k]);
        }
    }

    if (mode == EmbedMode::strict) {
        std::vector<std::size_t> shape(d, 1);
        for (std::size_t k = 0; k < d; ++k) {
            double g = 0.0;
            for (std::size_t i = 0; i < n_obs; ++i)
                g = detail::float_gcd(g, obs.coords[i * d + k] - mins[k], tol);
            if (g <= tol) g = 1.0;  // all coordinates equal in this dimension
            out.scale[k] = g;
            out.offset[k] = mins[k] - g;  // site 1 sits at the minimum coordinate
            double max_cell = 1.0;
            for (std::size_t i = 0; i < n_obs; ++i) {
                const double u = (obs.coords[i * d + k] - mins[k]) / g + 1.0;
                const double r = std::round(u);
                if (std::abs(u - r) > 1e-6)
                    throw std::invalid_argument(
                        "embed: coordinates are not commensurable in dimension " + std::to_string(k) +
                        " (use misaligned mode)");
                max_cell = std::max(max_cell, r);
            }
            shape[k] = static_cast<std::size_t>(max_cell);
        }
        if (target_shape) {
            if (target_shape->size() != d) throw std::invalid_argument("embed: target shape dimension mismatch");
            for (std::size_t k = 0; k < d; ++k) {
                if ((*target_shape)[k] < shape[k])
                    throw std::invalid_argument("embed: target shape smaller than the data extent");
                shape[k] = (*target_shape)[k];
            }
        }
        out.shape = shape;
        GridShape gs{shape};
        std::vector<std::size_t> idx(d);
        for (std::size_t i = 0; i < n_obs; ++i) {
            for (std::size_t k = 0; k < d; ++k) {
                const double u = (obs.coords[i * d + k] - mins[k]) / out.scale[k] + 1.0;
                idx[k] = static_cast<std::size_t>(std::llround(u)) - 1;
            }
            out.cell_of_obs[i] = gs.linear(idx);
        }
    } else {
        if (!target_shape) throw std::invalid_argument("embed: misaligned mode requires a target shape");
        if (target_shape->size() != d) throw std::invalid_argument("embed: target shape dimension mismatch");
        out.shape = *target_shape;
        GridShape gs{out.shape};
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t nk = out.shape[k];
            if (nk == 0) throw std::invalid_argument("embed: zero target extent");
            const double extent = maxs[k] - mins[k];
            out.scale[k] = (nk > 1 && extent > 0.0) ? extent / static_cast<double>(nk - 1) : 1.0;
            out.offset[k] = mins[k] - out.scale[k];
        }
        std::vector<std::size_t> idx(d);
        for (std::size_t i = 0; i < n_obs; ++i) {
            double dist2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double u = (obs.coords[i * d + k] - out.offset[k]) / out.scale[k];  // in [1, n]
                double cell = std::floor(u + 0.5);
                // exact tie between two cells: take the smaller index
                if (u - std::floor(u) == 0.5) cell = std::floor(u);
                cell = std::clamp(cell, 1.0, static_cast<double>(out.shape[k]));
                idx[k] = static_cast<std::size_t>(cell) - 1;
                const double resid = (u - cell) * out.scale[k];
                dist2 += resid * resid;
            }
            out.cell_of_obs[i] = gs.linear(idx);
            out.distance[i] = std::sqrt(dist2);
        }
    }

    // per-cell observation lists
    std::vector<std::size_t> order(n_obs);
    for (std::size_t i = 0; i < n_obs; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out.cell_of_obs[a] != out.cell_of_obs[b] ? out.cell_of_obs[a] < out.cell_of_obs[b] : a < b;
    });
    for (std::size_t i : order) {
        if (out.observed_cells.empty() || out.observed_cells.back() != out.cell_of_obs[i]) {
            out.observed_cells.push_back(out.cell_of_obs[i]);
            out.cell_obs.emplace_back();
        }
        out.cell_obs.back().push_back(i);
    }
    return out;
}

}  // namespace fgp
