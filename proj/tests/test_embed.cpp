#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "fgp/embed.hpp"

using namespace fgp;

namespace {
ObservationSet make_obs_1d(std::vector<double> xs, std::vector<double> vals) {
    ObservationSet o;
    o.dims = 1;
    o.coords = std::move(xs);
    o.values = std::move(vals);
    return o;
}
}  // namespace

TEST_CASE("strict embedding rescales by the gcd of coordinate differences") {
    auto obs = make_obs_1d({2.0, 4.0, 8.0}, {1.0, 2.0, 3.0});
    auto data = embed(obs, EmbedMode::strict);
    REQUIRE(data.scale[0] == Catch::Approx(2.0));
    REQUIRE(data.shape[0] >= 4);
    REQUIRE(data.cell_of_obs == std::vector<std::size_t>{0, 1, 3});  // cells 1, 2, 4
    for (double d : data.distance) REQUIRE(d == 0.0);
    // site map round-trips
    REQUIRE(data.cell_site(0)[0] == Catch::Approx(2.0));
    REQUIRE(data.cell_site(3)[0] == Catch::Approx(8.0));
}

TEST_CASE("strict embedding rejects incommensurable coordinates") {
    auto obs = make_obs_1d({0.0, 1.0, std::sqrt(2.0)}, {0.0, 0.0, 0.0});
    REQUIRE_THROWS_WITH(embed(obs, EmbedMode::strict), Catch::Matchers::ContainsSubstring("misaligned"));
}

TEST_CASE("strict embedding honors a larger target shape") {
    auto obs = make_obs_1d({1.0, 2.0, 3.0}, {0.0, 0.0, 0.0});
    auto data = embed(obs, EmbedMode::strict, std::vector<std::size_t>{8});
    REQUIRE(data.shape[0] == 8);
    REQUIRE_THROWS_AS(embed(obs, EmbedMode::strict, std::vector<std::size_t>{2}), std::invalid_argument);
}

TEST_CASE("misaligned embedding records distances and shares cells") {
    ObservationSet obs;
    obs.dims = 2;
    // extents are 4 in both dimensions, so the 5x5 sites fall on the
    // integer points 0..4
    obs.coords = {0.0, 0.0, 2.0, 3.0, 2.1, 3.2, 4.0, 4.0};
    obs.values = {1.0, 2.0, 3.0, 4.0};
    auto data = embed(obs, EmbedMode::misaligned, std::vector<std::size_t>{5, 5});

    REQUIRE(data.distance[0] == Catch::Approx(0.0).margin(1e-12));  // exactly on a site
    REQUIRE(data.distance[1] == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(data.distance[2] == Catch::Approx(std::hypot(0.1, 0.2)).margin(1e-9));
    // observations 1 and 2 share the nearest cell (2,3)
    REQUIRE(data.cell_of_obs[1] == data.cell_of_obs[2]);
    for (std::size_t c = 0; c < data.observed_cells.size(); ++c) {
        if (data.observed_cells[c] == data.cell_of_obs[1])
            REQUIRE(data.cell_obs[c] == std::vector<std::size_t>{1, 2});
    }
}

TEST_CASE("misaligned ties break toward the smaller cell index") {
    auto obs = make_obs_1d({0.0, 0.5, 2.0}, {0.0, 0.0, 0.0});
    auto data = embed(obs, EmbedMode::misaligned, std::vector<std::size_t>{3});
    // scale = 1, observation at 0.5 sits exactly between cells 1 and 2
    REQUIRE(data.scale[0] == Catch::Approx(1.0));
    REQUIRE(data.cell_of_obs[1] == 0);
}

TEST_CASE("misaligned mode requires a target shape and inputs are validated") {
    auto obs = make_obs_1d({0.0, 1.0}, {0.0, 0.0});
    REQUIRE_THROWS_AS(embed(obs, EmbedMode::misaligned), std::invalid_argument);
    ObservationSet empty;
    empty.dims = 1;
    REQUIRE_THROWS_AS(embed(empty, EmbedMode::strict), std::invalid_argument);
    auto bad = make_obs_1d({0.0, std::numeric_limits<double>::quiet_NaN()}, {0.0, 0.0});
    REQUIRE_THROWS_AS(embed(bad, EmbedMode::strict), std::invalid_argument);
}

TEST_CASE("duplicate coordinates occupy one cell with a two-element list") {
    auto obs = make_obs_1d({3.0, 3.0, 5.0}, {1.0, 2.0, 3.0});
    auto data = embed(obs, EmbedMode::strict);
    REQUIRE(data.cell_of_obs[0] == data.cell_of_obs[1]);
    REQUIRE(data.observed_cells.size() == 2);
    REQUIRE(data.cell_obs[0].size() == 2);
}
