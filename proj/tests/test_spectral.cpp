#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <numbers>
#include <set>

#include <Eigen/Dense>

#include "fgp/covariance.hpp"
#include "fgp/rng.hpp"
#include "fgp/spectral_diagonal.hpp"
#include "fgp/spectral_model.hpp"

using namespace fgp;
namespace {
constexpr double kPi = std::numbers::pi;

// quadrature oracle for the 1-D forward transform int exp(-i w x) C(x) dx
double transform_1d(const SpectralModel& m, double w, double half_width, int steps) {
    double acc = 0.0;
    const double h = 2.0 * half_width / steps;
    for (int i = 0; i < steps; ++i) {
        const double x = -half_width + (i + 0.5) * h;
        acc += m.covariance(std::span<const double>(&x, 1)) * std::cos(w * x);
    }
    return acc * h;
}

// quadrature oracle for the 1-D inversion C(x) = (1/2pi) int exp(i w x) g(w) dw
double invert_1d(const SpectralModel& m, double x, double half_width, int steps) {
    double acc = 0.0;
    const double h = 2.0 * half_width / steps;
    for (int i = 0; i < steps; ++i) {
        const double w = -half_width + (i + 0.5) * h;
        acc += m.spectral_density(std::span<const double>(&w, 1)) * std::cos(w * x);
    }
    return acc * h / (2.0 * kPi);
}

std::shared_ptr<const FrequencyLattice> lattice_1d(std::size_t n) {
    return std::make_shared<FrequencyLattice>(std::vector<std::size_t>{n}, std::vector<std::size_t>{n});
}
}  // namespace

TEST_CASE("Matern spectral density matches the exponential-kernel transform at kappa = 1/2") {
    SpectralModel m{Family::matern, 1.0, {1.0}, 0.5, 0.0};
    const double w0 = 0.0;
    REQUIRE(m.spectral_density(std::span<const double>(&w0, 1)) == Catch::Approx(2.0).epsilon(1e-12));
    // quadrature of int exp(-|x|) cos(w x) dx against the closed form 2/(1+w^2)
    for (double w : {0.0, 0.7, 1.9}) {
        const double oracle = transform_1d(m, w, 60.0, 400000);
        REQUIRE(m.spectral_density(std::span<const double>(&w, 1)) == Catch::Approx(oracle).epsilon(1e-6));
        REQUIRE(m.spectral_density(std::span<const double>(&w, 1)) ==
                Catch::Approx(2.0 / (1.0 + w * w)).epsilon(1e-10));
    }
}

TEST_CASE("squared exponential density matches its quadrature oracle") {
    SpectralModel m{Family::squared_exponential, 1.0, {2.0}, 1.5, 0.0};
    const double w0 = 0.0;
    REQUIRE(m.spectral_density(std::span<const double>(&w0, 1)) ==
            Catch::Approx(std::sqrt(2.0 * kPi) * 2.0).epsilon(1e-12));
    for (double w : {0.0, 0.4, 1.1}) {
        const double oracle = transform_1d(m, w, 30.0, 200000);
        REQUIRE(m.spectral_density(std::span<const double>(&w, 1)) == Catch::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("spectral densities are even and inversion recovers the covariance") {
    Rng rng(11);
    for (auto fam : {Family::matern, Family::squared_exponential}) {
        SpectralModel m{fam, 2.3, {1.7}, 1.5, 0.0};
        for (int t = 0; t < 20; ++t) {
            const double w = rng.uniform(-8.0, 8.0);
            const double wp = w, wn = -w;
            REQUIRE(m.spectral_density(std::span<const double>(&wp, 1)) ==
                    m.spectral_density(std::span<const double>(&wn, 1)));
        }
        // the normalization pins C(0) = phi through the inversion formula
        for (double x : {0.0, 0.9, 2.5}) {
            const double c = invert_1d(m, x, 200.0, 400000);
            REQUIRE(c == Catch::Approx(m.covariance(std::span<const double>(&x, 1))).margin(2e-4));
        }
    }
}

TEST_CASE("Matern closed form at kappa = 1.5 equals the textbook expression") {
    SpectralModel m{Family::matern, 100.0, {5.0}, 1.5, 0.0};
    for (double r : {0.0, 1.0, 5.0, 12.0}) {
        const double expect = 100.0 * (1.0 + r / 5.0) * std::exp(-r / 5.0);
        REQUIRE(m.covariance(std::span<const double>(&r, 1)) == Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("separable product factorizes over dimensions") {
    SpectralModel m{Family::separable_product, 3.0, {1.0, 4.0}, 1.5, 0.0};
    std::vector<double> w{0.5, 0.25};
    SpectralModel a{Family::squared_exponential, 1.0, {1.0}, 1.5, 0.0};
    SpectralModel b{Family::squared_exponential, 1.0, {4.0}, 1.5, 0.0};
    const double ga = a.spectral_density(std::span<const double>(&w[0], 1));
    const double gb = b.spectral_density(std::span<const double>(&w[1], 1));
    REQUIRE(m.spectral_density(w) == Catch::Approx(3.0 * ga * gb).epsilon(1e-12));
}

TEST_CASE("model validation and serialization") {
    SpectralModel m{Family::matern, 100.0, {5.0}, 1.5, 1.0, 0.01};
    REQUIRE_NOTHROW(m.validate());
    nlohmann::json j = m;
    SpectralModel back = j.get<SpectralModel>();
    REQUIRE(back.family == m.family);
    REQUIRE(back.phi == m.phi);
    REQUIRE(back.rho == m.rho);
    REQUIRE(back.sigma2 == m.sigma2);

    SpectralModel bad = m;
    bad.rho = {-1.0};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    const double inf = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(m.spectral_density(std::span<const double>(&inf, 1)), std::invalid_argument);
}

TEST_CASE("truncation keeps exactly the frequencies above the threshold") {
    auto lat = lattice_1d(64);
    SpectralModel m{Family::squared_exponential, 1.0, {3.0}, 1.5, 1.0};

    auto full = truncate_spectrum(m, lat, 0.0);
    REQUIRE(full.size() == 64);
    REQUIRE(full.active_fraction() == 1.0);

    auto diag = truncate_spectrum(m, lat, 0.01);
    REQUIRE(diag.size() < 64);
    for (std::size_t p = 0; p < diag.size(); ++p) REQUIRE(diag.g[p] >= 0.01 * m.sigma2);
    // dropped ones are below threshold
    std::set<std::size_t> act(diag.active.begin(), diag.active.end());
    for (std::size_t l = 0; l < 64; ++l) {
        if (act.count(l)) continue;
        auto w = lat->omega(l);
        REQUIRE(m.spectral_density(w) < 0.01 * m.sigma2);
    }
    // symmetric under negation
    for (std::size_t p = 0; p < diag.size(); ++p) {
        auto w = diag.omega(p);
        auto wn = diag.omega(diag.partner[p]);
        REQUIRE(wn[0] == Catch::Approx(-w[0]).margin(1e-15));
    }
}

TEST_CASE("truncation reports the paper-scale sparsity on the reference setup") {
    auto lat = std::make_shared<FrequencyLattice>(std::vector<std::size_t>{100, 100},
                                                  std::vector<std::size_t>{100, 100});
    SpectralModel se{Family::squared_exponential, 100.0, {5.0}, 1.5, 1.0};
    auto diag = truncate_spectrum(se, lat, 0.01);
    REQUIRE(diag.band_fraction() > 0.10);
    REQUIRE(diag.band_fraction() < 0.16);

    SpectralModel mat{Family::matern, 100.0, {5.0}, 1.5, 1.0};
    auto dm = truncate_spectrum(mat, lat, 0.01);
    REQUIRE(dm.band_fraction() == 1.0);
    REQUIRE(dm.active_fraction() > 0.99);
}

TEST_CASE("empty active set is a hard error") {
    auto lat = lattice_1d(16);
    SpectralModel m{Family::squared_exponential, 1e-10, {1.0}, 1.5, 1.0};
    REQUIRE_THROWS_AS(truncate_spectrum(m, lat, 0.01), std::runtime_error);
}

TEST_CASE("covariance from spectrum: degenerate and limiting cases") {
    auto lat = lattice_1d(64);
    SpectralModel pure_nugget{Family::squared_exponential, 0.0, {1.0}, 1.5, 2.5};
    auto d0 = truncate_spectrum(pure_nugget, lat, 0.0);
    const double zero = 0.0;
    REQUIRE(covariance_from_spectrum(d0, std::span<const double>(&zero, 1), true) == Catch::Approx(2.5));
    REQUIRE(covariance_from_spectrum(d0, std::span<const double>(&zero, 1), false) == Catch::Approx(0.0));

    SpectralModel se{Family::squared_exponential, 1.0, {3.0}, 1.5, 0.5};
    auto diag = full_spectrum(se, lat);
    // lag 0 with nugget approaches phi + sigma2 for a well-resolved spectrum
    REQUIRE(covariance_from_spectrum(diag, std::span<const double>(&zero, 1), true) ==
            Catch::Approx(1.5).margin(1e-3));
}

TEST_CASE("spectral covariance approaches the closed form at O(1/m^2)") {
    SpectralModel se{Family::squared_exponential, 1.0, {3.0}, 1.5, 0.0};
    const double lag = 2.0;
    auto diag64 = full_spectrum(se, lattice_1d(64));
    const double c64 = covariance_from_spectrum(diag64, std::span<const double>(&lag, 1), false);
    REQUIRE(c64 == Catch::Approx(std::exp(-4.0 / 18.0)).margin(1.0 / (64.0 * 64.0)));

    // error at lags 0..10 drops by >= 3x per doubling of m; rho is chosen so
    // the periodization error stays above the floating-point floor
    SpectralModel wide{Family::squared_exponential, 1.0, {16.0}, 1.5, 0.0};
    double prev = -1.0;
    for (std::size_t n : {32, 64, 128, 256}) {
        auto diag = full_spectrum(wide, lattice_1d(n));
        double maxerr = 0.0;
        for (int g = 0; g <= 10; ++g) {
            const double x = g;
            const double c = covariance_from_spectrum(diag, std::span<const double>(&x, 1), false);
            maxerr = std::max(maxerr, std::abs(c - wide.covariance(std::span<const double>(&x, 1))));
        }
        if (prev > 0.0) REQUIRE(maxerr <= prev / 3.0);
        prev = maxerr;
    }
}

TEST_CASE("dense oracle agrees with the spectral sum and is positive definite") {
    Rng rng(7);
    auto lat = std::make_shared<FrequencyLattice>(std::vector<std::size_t>{12, 12},
                                                  std::vector<std::size_t>{12, 12});
    SpectralModel m{Family::matern, 2.0, {2.5}, 1.5, 0.3};
    auto diag = full_spectrum(m, lat);

    SECTION("single location") {
        std::vector<std::vector<double>> loc{{3.7, 1.1}};
        auto s = dense_covariance_oracle(diag, loc);
        const std::vector<double> zero{0.0, 0.0};
        REQUIRE(s(0, 0) == Catch::Approx(covariance_from_spectrum(diag, zero, true)).epsilon(1e-12));
    }

    SECTION("entries match the cosine-sum path to 1e-12") {
        std::vector<std::vector<double>> locs;
        for (int i = 0; i < 8; ++i) locs.push_back({rng.uniform(0.0, 12.0), rng.uniform(0.0, 12.0)});
        auto s = dense_covariance_oracle(diag, locs);
        for (std::size_t i = 0; i < locs.size(); ++i)
            for (std::size_t j = 0; j < locs.size(); ++j) {
                std::vector<double> lag{locs[i][0] - locs[j][0], locs[i][1] - locs[j][1]};
                REQUIRE(s(i, j) == Catch::Approx(covariance_from_spectrum(diag, lag, i == j)).margin(1e-12));
            }
    }

    SECTION("Cholesky succeeds on 50 random location sets") {
        for (int trial = 0; trial < 50; ++trial) {
            const int count = 2 + static_cast<int>(rng.uniform() * 18);
            std::vector<std::vector<double>> locs;
            for (int i = 0; i < count; ++i) locs.push_back({rng.uniform(0.0, 12.0), rng.uniform(0.0, 12.0)});
            auto s = dense_covariance_oracle(diag, locs);
            Eigen::LLT<Eigen::MatrixXd> llt(s);
            REQUIRE(llt.info() == Eigen::Success);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
            REQUIRE(es.eigenvalues().minCoeff() >= 0.3 - 1e-9);
        }
    }

    SECTION("size guard") {
        std::vector<std::vector<double>> locs(2049, std::vector<double>{0.0, 0.0});
        REQUIRE_THROWS_AS(dense_covariance_oracle(diag, locs), std::invalid_argument);
    }
}

TEST_CASE("imaginary parts of the complex spectral sum cancel") {
    // A self-paired Nyquist coordinate stands for the +/- pair with the mass
    // split evenly; on that literal symmetric set the imaginary parts cancel
    // for arbitrary real lags, and the real part is the cosine-sum value.
    Rng rng(13);
    auto lat = std::make_shared<FrequencyLattice>(std::vector<std::size_t>{10, 8},
                                                  std::vector<std::size_t>{5, 8});
    SpectralModel m{Family::squared_exponential, 1.0, {1.2}, 1.5, 0.1};
    auto diag = full_spectrum(m, lat);
    for (int t = 0; t < 25; ++t) {
        std::vector<double> lag{rng.uniform(-9.0, 9.0), rng.uniform(-9.0, 9.0)};
        std::complex<double> acc{0.0, 0.0};
        double gsum = 0.0;
        for (std::size_t p = 0; p < diag.size(); ++p) {
            auto w = diag.omega(p);
            std::vector<std::size_t> nyq;
            for (std::size_t k = 0; k < 2; ++k) {
                const auto n_k = lat->n_dims()[k];
                if (lat->m_dims()[k] == n_k && n_k % 2 == 0 &&
                    lat->signed_index(diag.active[p], k) == -static_cast<long>(n_k / 2))
                    nyq.push_back(k);
            }
            const std::size_t variants = std::size_t{1} << nyq.size();
            for (std::size_t bits = 0; bits < variants; ++bits) {
                auto wv = w;
                for (std::size_t q = 0; q < nyq.size(); ++q)
                    if (bits & (std::size_t{1} << q)) wv[nyq[q]] = -wv[nyq[q]];
                acc += diag.g[p] / static_cast<double>(variants) *
                       std::polar(1.0, wv[0] * lag[0] + wv[1] * lag[1]);
            }
            gsum += diag.g[p];
        }
        REQUIRE(std::abs(acc.imag()) <= 1e-10 * gsum);
        const double n = static_cast<double>(lat->n_total());
        REQUIRE(acc.real() / n == Catch::Approx(covariance_from_spectrum(diag, lag, false)).margin(1e-12));
    }
}

TEST_CASE("covariance depends on the lag only") {
    Rng rng(5);
    auto lat = lattice_1d(32);
    SpectralModel m{Family::matern, 1.0, {2.0}, 1.5, 0.2};
    auto diag = full_spectrum(m, lat);
    for (int t = 0; t < 20; ++t) {
        const double a = rng.uniform(-20.0, 20.0), b = rng.uniform(-20.0, 20.0), shift = rng.uniform(-5.0, 5.0);
        const double lag = a - b;
        const double lag_shifted = (a + shift) - (b + shift);
        REQUIRE(covariance_from_spectrum(diag, std::span<const double>(&lag, 1), false) ==
                Catch::Approx(covariance_from_spectrum(diag, std::span<const double>(&lag_shifted, 1), false))
                    .margin(1e-12));
    }
}

TEST_CASE("truncated and full oracle matrices differ by at most 0.02 sigma2 in spectral norm") {
    auto lat = std::make_shared<FrequencyLattice>(std::vector<std::size_t>{100, 100},
                                                  std::vector<std::size_t>{100, 100});
    SpectralModel se{Family::squared_exponential, 100.0, {5.0}, 1.5, 1.0};
    auto d_full = truncate_spectrum(se, lat, 0.0);
    auto d_trunc = truncate_spectrum(se, lat, 0.01);

    Rng rng(3);
    std::vector<std::vector<double>> locs;
    for (int i = 0; i < 30; ++i) locs.push_back({rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)});
    auto a = dense_covariance_oracle(d_full, locs);
    auto b = dense_covariance_oracle(d_trunc, locs);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a - b, Eigen::EigenvaluesOnly);
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    REQUIRE(norm <= 0.02 * se.sigma2);
}
