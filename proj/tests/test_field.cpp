#include <catch2/catch.hpp>

#include "sie2d/field.hpp"
#include "sie2d/transforms.hpp"

using namespace sie2d;

TEST_CASE("field_from_modes places coefficients and rejects bad modes") {
    const SpectralField f = field_from_modes({{{1, 0}, 1.0}}, 4);
    CHECK(l2_norm(f) == Approx(1.0).margin(0));
    CHECK(f.coeff({1, 0}) == 1.0);
    CHECK(f.coeff({2, 2}) == 0.0);

    const SpectralField empty = field_from_modes({}, 4);
    CHECK(l2_norm(empty) == 0.0);

    const SpectralField two = field_from_modes({{{1, 0}, 1.0}, {{0, 1}, 2.0}}, 4);
    CHECK(l2_norm(two) * l2_norm(two) == Approx(5.0).epsilon(1e-15));

    CHECK_THROWS_AS(field_from_modes({{{5, 0}, 1.0}}, 4), std::invalid_argument);
    CHECK_THROWS_AS(field_from_modes({{{0, 0}, 1.0}}, 4), std::invalid_argument);
    CHECK_THROWS_WITH(field_from_modes({{{5, 0}, 1.0}}, 4), Catch::Contains("(5,0)"));
}

TEST_CASE("galerkin_project truncates and never grows the norm") {
    const SpectralField f = field_from_modes({{{1, 0}, 1.0}, {{3, 3}, 2.0}}, 4);

    SECTION("projection onto the same truncation is the identity") {
        const SpectralField same = galerkin_project(f, 4);
        CHECK(same == f);
    }
    SECTION("full truncation of a high mode yields zero") {
        const SpectralField only_high = field_from_modes({{{3, 3}, 1.0}}, 4);
        CHECK(l2_norm(galerkin_project(only_high, 2)) == 0.0);
    }
    SECTION("surviving coefficients are untouched, norm decreases") {
        const SpectralField p = galerkin_project(f, 2);
        CHECK(p.coeff({1, 0}) == 1.0);
        CHECK(p.coeff({3, 3}) == 0.0);
        CHECK(l2_norm(p) < l2_norm(f));
        CHECK(l2_norm(p) <= l2_norm(f));
    }
    SECTION("invalid target truncation is rejected") {
        CHECK_THROWS_AS(galerkin_project(f, 0), std::invalid_argument);
        CHECK_THROWS_AS(galerkin_project(f, 5), std::invalid_argument);
    }
}

TEST_CASE("norms: single-mode closed forms") {
    const SpectralField f = field_from_modes({{{1, 0}, 1.0}}, 4);
    CHECK(l2_norm(f) == Approx(1.0));
    CHECK(sobolev_norm(f, 0) == Approx(1.0));
    CHECK(sobolev_norm(f, 1) == Approx(std::sqrt(1.0 + 4.0 * M_PI * M_PI)).epsilon(1e-14));

    // |e_k|_4^4 = integral of (sqrt(2) cos)^4 = 3/2
    CHECK(lp_grid_norm(f, 4.0, 32) == Approx(std::pow(1.5, 0.25)).epsilon(1e-13));

    const SpectralField zero(4);
    CHECK(l2_norm(zero) == 0.0);
    CHECK(sobolev_norm(zero, 3) == 0.0);
    CHECK(lp_grid_norm(zero, 4.0, 16) == 0.0);

    CHECK_THROWS_AS(sobolev_norm(f, -1), std::invalid_argument);
    CHECK_THROWS_AS(lp_grid_norm(f, 0.5, 16), std::invalid_argument);
    CHECK_THROWS_AS(lp_grid_norm(f, 2.0, 4), std::invalid_argument);
}

TEST_CASE("real/complex coefficient mapping round-trips and preserves Parseval") {
    std::mt19937_64 eng(7);
    std::normal_distribution<double> normal;
    SpectralField f(5);
    for_each_mode(5, [&](ModeIndex k) { f.slot(k) = normal(eng); });

    const ComplexModes c = to_complex_modes(f);
    double complex_sum = 0.0;
    for (const auto& v : c.c) complex_sum += std::norm(v);
    CHECK(complex_sum == Approx(l2_norm(f) * l2_norm(f)).epsilon(1e-14));

    const SpectralField back = to_real_field(c);
    for_each_mode(5, [&](ModeIndex k) { CHECK(back.slot(k) == Approx(f.slot(k)).margin(1e-15)); });
}
