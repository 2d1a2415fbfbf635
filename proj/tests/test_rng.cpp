#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fgp/rng.hpp"

using namespace fgp;

TEST_CASE("rng streams are deterministic and forkable") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.uniform() == b.uniform());
    Rng base(7);
    Rng f1 = base.fork(0), f2 = base.fork(1);
    REQUIRE(f1.uniform() != f2.uniform());
}

TEST_CASE("variate moments match their targets") {
    Rng rng(123);
    const int n = 200000;

    SECTION("normal") {
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = rng.normal(2.0, 3.0);
            s += x;
            s2 += x * x;
        }
        const double mean = s / n, var = s2 / n - mean * mean;
        REQUIRE(mean == Catch::Approx(2.0).margin(0.05));
        REQUIRE(var == Catch::Approx(9.0).margin(0.2));
    }
    SECTION("gamma") {
        for (auto&& [shape, scale] : std::vector<std::pair<double, double>>{{0.5, 2.0}, {3.0, 1.5}}) {
            double s = 0.0, s2 = 0.0;
            for (int i = 0; i < n; ++i) {
                const double x = rng.gamma(shape, scale);
                s += x;
                s2 += x * x;
            }
            const double mean = s / n, var = s2 / n - mean * mean;
            REQUIRE(mean == Catch::Approx(shape * scale).epsilon(0.03));
            REQUIRE(var == Catch::Approx(shape * scale * scale).epsilon(0.08));
        }
    }
    SECTION("inverse gamma") {
        // IG(3, 4): mean = 4/2 = 2, var = 16/(4*1) = 4
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = rng.inverse_gamma(3.0, 4.0);
            s += x;
            s2 += x * x;
        }
        const double mean = s / n, var = s2 / n - mean * mean;
        REQUIRE(mean == Catch::Approx(2.0).margin(0.05));
        REQUIRE(var == Catch::Approx(4.0).margin(0.6));
    }
    SECTION("truncated normal honors the bound and the moment formula") {
        const double mu = 1.0, sd = 2.0, lower = 3.5;
        double s = 0.0;
        const int nt = 100000;
        for (int i = 0; i < nt; ++i) {
            const double x = rng.truncated_normal_lower(mu, sd, lower);
            REQUIRE(x >= lower);
            s += x;
        }
        const double a = (lower - mu) / sd;
        const double lambda = std::exp(-0.5 * a * a) / std::sqrt(2.0 * 3.14159265358979323846) /
                              (0.5 * std::erfc(a / std::sqrt(2.0)));
        REQUIRE(s / nt == Catch::Approx(mu + sd * lambda).margin(0.02));

        double su = 0.0;
        for (int i = 0; i < nt; ++i) {
            const double x = rng.truncated_normal_upper(mu, sd, -1.0);
            REQUIRE(x < -1.0);
            su += x;
        }
        const double b = (-1.0 - mu) / sd;
        const double lam2 = std::exp(-0.5 * b * b) / std::sqrt(2.0 * 3.14159265358979323846) /
                            (0.5 * std::erfc(-b / std::sqrt(2.0)));
        REQUIRE(su / nt == Catch::Approx(mu - sd * lam2).margin(0.02));
    }
}

TEST_CASE("normal cdf sanity") {
    REQUIRE(norm_cdf(0.0) == Catch::Approx(0.5));
    REQUIRE(norm_cdf(1.959963985) == Catch::Approx(0.975).margin(1e-6));
    REQUIRE(norm_cdf(-1.959963985) == Catch::Approx(0.025).margin(1e-6));
}
