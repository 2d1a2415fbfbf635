#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include <Eigen/Dense>

#include "fgp/covariance.hpp"
#include "fgp/likelihood.hpp"
#include "fgp/rng.hpp"
#include "fgp/stationary.hpp"

using namespace fgp;

namespace {

std::shared_ptr<const FrequencyLattice> square_lattice(std::size_t n) {
    return std::make_shared<FrequencyLattice>(std::vector<std::size_t>{n, n},
                                              std::vector<std::size_t>{n, n});
}

// dense multivariate-normal log density oracle
double dense_mvn_logpdf(const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    REQUIRE(llt.info() == Eigen::Success);
    const Eigen::VectorXd alpha = llt.solve(x);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < sigma.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * (x.dot(alpha) + logdet + static_cast<double>(sigma.rows()) * kLog2Pi);
}

// lattice-site coordinate list (1-based integer sites)
std::vector<std::vector<double>> all_sites(const std::vector<std::size_t>& shape) {
    GridShape gs{shape};
    std::vector<std::vector<double>> sites;
    for (std::size_t s = 0; s < gs.total(); ++s) {
        auto idx = gs.unravel(s);
        std::vector<double> c(shape.size());
        for (std::size_t k = 0; k < shape.size(); ++k) c[k] = static_cast<double>(idx[k] + 1);
        sites.push_back(std::move(c));
    }
    return sites;
}

}  // namespace

TEST_CASE("prior densities match the textbook formulas") {
    auto u = Prior::uniform(0.0, 1000.0);
    REQUIRE(u.log_density(5.0) == Catch::Approx(-std::log(1000.0)));
    REQUIRE(u.log_density(-1.0) == -std::numeric_limits<double>::infinity());
    auto ig = Prior::inv_gamma(0.1, 0.1);
    const double x = 2.0;
    const double expect = 0.1 * std::log(0.1) - std::lgamma(0.1) - 1.1 * std::log(x) - 0.1 / x;
    REQUIRE(ig.log_density(x) == Catch::Approx(expect));

    Rng rng(4);
    const double med = Prior::inv_gamma(3.0, 4.0).median();
    int below = 0;
    for (int i = 0; i < 20000; ++i)
        if (rng.inverse_gamma(3.0, 4.0) < med) ++below;
    REQUIRE(below == Catch::Approx(10000).margin(400));
}

TEST_CASE("zero fields reduce the likelihood to its determinant terms") {
    auto lat = square_lattice(4);
    SpectralModel m{Family::squared_exponential, 2.0, {1.3}, 1.5, 0.7};
    auto diag = full_spectrum(m, lat);

    ObservationSet obs;
    obs.dims = 2;
    obs.coords = {1.0, 1.0, 2.0, 3.0};
    obs.values = {0.0, 0.0};
    auto data = embed(obs, EmbedMode::strict, std::vector<std::size_t>{4, 4});

    LatticeField z({4, 4}, 0.0);
    const double nu2 = 0.3;
    const double got = augmented_log_likelihood(z, m, diag, obs, data, nu2);

    double expect = 0.0;
    for (std::size_t p = 0; p < diag.size(); ++p) expect += -0.5 * std::log(diag.g[p] + m.sigma2);
    expect += -0.5 * 16.0 * kLog2Pi;
    expect += 2.0 * (-0.5 * (std::log(nu2) + kLog2Pi));
    REQUIRE(got == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("augmented likelihood equals the dense oracle on full-rank lattices") {
    Rng rng(99);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n_side = trial % 2 == 0 ? 4 : 6;
        auto lat = square_lattice(n_side);
        SpectralModel m{trial % 3 == 0 ? Family::matern : Family::squared_exponential,
                        rng.uniform(0.5, 5.0),
                        {rng.uniform(0.8, 3.0)},
                        1.5,
                        rng.uniform(0.2, 1.5)};
        auto diag = full_spectrum(m, lat);
        const std::size_t n = lat->n_total();

        LatticeField z({n_side, n_side});
        for (auto& v : z.values) v = rng.normal(0.0, 2.0);

        ObservationSet obs;
        obs.dims = 2;
        const double nu2 = rng.uniform(0.05, 0.5);
        GridShape gs{{n_side, n_side}};
        for (std::size_t c = 0; c < n; ++c) {
            if (rng.uniform() < 0.4) {
                auto idx = gs.unravel(c);
                obs.coords.push_back(static_cast<double>(idx[0] + 1));
                obs.coords.push_back(static_cast<double>(idx[1] + 1));
                obs.values.push_back(z.values[c] + rng.normal(0.0, std::sqrt(nu2)));
            }
        }
        if (obs.values.empty()) continue;
        auto data = embed(obs, EmbedMode::strict, std::vector<std::size_t>{n_side, n_side});

        const double fast = augmented_log_likelihood(z, m, diag, obs, data, nu2);

        auto sigma = dense_covariance_oracle(diag, all_sites({n_side, n_side}));
        Eigen::VectorXd zv = Eigen::Map<const Eigen::VectorXd>(z.values.data(), static_cast<Eigen::Index>(n));
        double dense = dense_mvn_logpdf(zv, sigma);
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const double r = obs.values[i] - z.values[data.cell_of_obs[i]];
            dense += -0.5 * (r * r / nu2 + std::log(nu2) + kLog2Pi);
        }
        REQUIRE(fast == Catch::Approx(dense).epsilon(1e-8));
    }
}

TEST_CASE("truncated likelihood stays close to the full one per data point") {
    // paper-scale squared-exponential configuration on its embedding lattice
    auto lat = std::make_shared<FrequencyLattice>(std::vector<std::size_t>{100, 100},
                                                  std::vector<std::size_t>{100, 100});
    SpectralModel m{Family::squared_exponential, 100.0, {5.0}, 1.5, 1.0};
    auto d_full = truncate_spectrum(m, lat, 0.0);
    auto d_trunc = truncate_spectrum(m, lat, 0.01);

    Rng rng(7);
    LatticeField z = draw_prior_field(d_full, detail::eval_g(d_full, m), m.sigma2, rng);
    WhittleCache cache_full(z, d_full);
    WhittleCache cache_trunc(z, d_trunc);
    const double ll_full = latent_log_density(cache_full, detail::eval_g(d_full, m), m.sigma2);
    const double ll_trunc = latent_log_density(cache_trunc, detail::eval_g(d_trunc, m), m.sigma2);
    const double per_point = std::abs(ll_full - ll_trunc) / static_cast<double>(lat->n_total());
    REQUIRE(per_point <= 1e-3);
}

TEST_CASE("non-positive variances are rejected") {
    auto lat = square_lattice(4);
    SpectralModel m{Family::squared_exponential, 1.0, {1.0}, 1.5, 1.0};
    auto diag = full_spectrum(m, lat);
    LatticeField z({4, 4}, 0.0);
    WhittleCache cache(z, diag);
    REQUIRE_THROWS_AS(latent_log_density(cache, detail::eval_g(diag, m), 0.0), std::invalid_argument);
}
