#include <catch2/catch.hpp>

#include <random>

#include "sie2d/transforms.hpp"

using namespace sie2d;

namespace {
SpectralField random_field(int n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> normal;
    SpectralField f(n);
    for_each_mode(n, [&](ModeIndex k) { f.slot(k) = normal(eng); });
    return f;
}
}  // namespace

TEST_CASE("basis mode lands on the expected grid samples") {
    const SpectralField f = field_from_modes({{{1, 0}, 1.0}}, 1);
    const GridBuffer g = evaluate_on_grid(f, 8);
    for (int a = 0; a < 8; ++a) {
        const double expected = std::sqrt(2.0) * std::cos(kTwoPi * a / 8.0);
        for (int b = 0; b < 8; ++b) CHECK(g.at(a, b) == Approx(expected).margin(1e-14));
    }

    // sine partner: e_{(0,-1)} = sqrt(2) sin(2 pi (0,-1).x) = -sqrt(2) sin(2 pi x2)
    const SpectralField s = field_from_modes({{{0, -1}, 1.0}}, 1);
    const GridBuffer gs = evaluate_on_grid(s, 8);
    for (int b = 0; b < 8; ++b) {
        const double expected = -std::sqrt(2.0) * std::sin(kTwoPi * b / 8.0);
        for (int a = 0; a < 8; ++a) CHECK(gs.at(a, b) == Approx(expected).margin(1e-14));
    }
}

TEST_CASE("grid round-trip is exact at and above the minimum grid") {
    const SpectralField f = random_field(4, 21);
    for (const int m : {min_grid_size(4), 16, 20}) {
        const SpectralField back = grid_to_spectral(evaluate_on_grid(f, m), 4);
        double worst = 0.0;
        for_each_mode(4, [&](ModeIndex k) {
            worst = std::max(worst, std::abs(back.slot(k) - f.slot(k)));
        });
        CHECK(worst <= 1e-13 * l2_norm(f));
    }
}

TEST_CASE("constant grid projects to the zero field (mean is discarded)") {
    GridBuffer ones(12);
    for (double& v : ones.values) v = 1.0;
    const SpectralField f = grid_to_spectral(ones, 4);
    CHECK(l2_norm(f) == 0.0);
}

TEST_CASE("undersized grids are rejected") {
    const SpectralField f = random_field(4, 3);
    CHECK_THROWS_AS(evaluate_on_grid(f, 2 * 4 + 1), std::invalid_argument);
    GridBuffer small(6);
    CHECK_THROWS_AS(grid_to_spectral(small, 4), std::invalid_argument);
}

TEST_CASE("dealiasing grid is the smallest power of two at or above 3N+1") {
    CHECK(dealias_grid_size(2) == 8);
    CHECK(dealias_grid_size(3) == 16);
    CHECK(dealias_grid_size(4) == 16);
    CHECK(dealias_grid_size(16) == 64);
}

TEST_CASE("quadrature L2 norm matches the coefficient norm") {
    const SpectralField f = random_field(6, 5);
    CHECK(lp_grid_norm(f, 2.0, min_grid_size(6)) == Approx(l2_norm(f)).epsilon(1e-12));
    CHECK(lp_grid_norm(f, 2.0, 64) == Approx(l2_norm(f)).epsilon(1e-12));
}
