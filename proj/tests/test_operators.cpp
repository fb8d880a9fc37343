#include <catch2/catch.hpp>

#include <random>

#include "sie2d/operators.hpp"
#include "sie2d/testing/quadrature_oracle.hpp"

using namespace sie2d;

namespace {
SpectralField random_unit(int n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> normal;
    SpectralField f(n);
    for_each_mode(n, [&](ModeIndex k) { f.slot(k) = normal(eng); });
    f *= 1.0 / l2_norm(f);
    return f;
}
}  // namespace

TEST_CASE("Biot-Savart of a single cosine mode is the expected shear flow") {
    const SpectralField xi = field_from_modes({{{1, 0}, 1.0}}, 4);
    const VelocityField u = biot_savart(xi);

    // u = (0, sqrt(2) sin(2 pi x1) / (2 pi))
    const GridBuffer u1 = synthesize_on_grid(u.component(0), 16);
    const GridBuffer u2 = synthesize_on_grid(u.component(1), 16);
    for (int a = 0; a < 16; ++a) {
        const double expected = std::sqrt(2.0) * std::sin(kTwoPi * a / 16.0) / kTwoPi;
        for (int b = 0; b < 16; ++b) {
            CHECK(u1.at(a, b) == Approx(0.0).margin(1e-14));
            CHECK(u2.at(a, b) == Approx(expected).margin(1e-13));
        }
    }

    // oracle route through the real-basis kernel formula agrees
    for (int a = 0; a < 8; ++a) {
        const auto uv = testing::eval_velocity(xi, a / 8.0, 0.3);
        CHECK(uv[0] == Approx(0.0).margin(1e-14));
        CHECK(uv[1] == Approx(std::sqrt(2.0) * std::sin(kTwoPi * a / 8.0) / kTwoPi).margin(1e-13));
    }
}

TEST_CASE("Biot-Savart: zero in, zero out; divergence vanishes bitwise") {
    const SpectralField zero(6);
    CHECK(l2_norm(biot_savart(zero)) == 0.0);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const VelocityField u = biot_savart(random_unit(6, 100 + seed));
        CHECK(max_divergence(u) == 0.0);
        CHECK(hermitian_defect(u) == 0.0);
    }
}

TEST_CASE("curl inverts Biot-Savart coefficientwise") {
    for (const int n : {2, 5, 16}) {
        const SpectralField xi = random_unit(n, 7 + static_cast<std::uint64_t>(n));
        SpectralField back = curl(biot_savart(xi));
        back -= xi;
        double worst = 0.0;
        for (double v : back.raw()) worst = std::max(worst, std::abs(v));
        CHECK(worst <= 1e-13);
    }
}

TEST_CASE("velocity norm obeys the 1/(2 pi) multiplier bound") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const SpectralField xi = random_unit(8, 500 + seed);
        CHECK(l2_norm(biot_savart(xi)) <= 1.0 / kTwoPi);
    }
}

TEST_CASE("transport term vanishes on a single mode and on zero advector") {
    const SpectralField e10 = field_from_modes({{{1, 0}, 1.0}}, 4);
    CHECK(l2_norm(transport_term(e10, e10)) == 0.0);

    const SpectralField zeta = random_unit(4, 11);
    CHECK(l2_norm(transport_term(SpectralField(4), zeta)) == 0.0);

    const SpectralField other(5);
    CHECK_THROWS_AS(transport_term(e10, SpectralField(5)), std::invalid_argument);
}

TEST_CASE("transport term matches the quadrature matrix oracle on Lambda_2") {
    const auto modes = modes_in_lambda(2);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SpectralField xi = random_unit(2, 40 + seed);
        const SpectralField zeta = random_unit(2, 60 + seed);
        const Eigen::MatrixXd b = testing::assemble_transport_matrix(xi, 16);
        Eigen::VectorXd z(static_cast<Eigen::Index>(modes.size()));
        for (std::size_t i = 0; i < modes.size(); ++i) z[static_cast<Eigen::Index>(i)] = zeta.slot(modes[i]);
        const Eigen::VectorXd expected = b * z;
        const SpectralField got = transport_term(xi, zeta);
        for (std::size_t i = 0; i < modes.size(); ++i)
            CHECK(got.slot(modes[i]) == Approx(expected[static_cast<Eigen::Index>(i)]).margin(1e-12));
    }
}

TEST_CASE("transport term is skew-symmetric in its second argument") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const int n = std::array<int, 4>{2, 4, 8, 16}[seed % 4];
        const SpectralField xi = random_unit(n, 900 + seed);
        SpectralField zeta = random_unit(n, 1900 + seed);
        zeta *= 2.5;
        const double h1 = sobolev_norm(zeta, 1);
        CHECK(std::abs(l2_inner(transport_term(xi, zeta), zeta)) <= 1e-10 * l2_norm(xi) * h1 * h1);
    }
}

TEST_CASE("pressure: zero velocity and pure shear give zero pressure") {
    CHECK(l2_norm(pressure_from_velocity(VelocityField(4))) == 0.0);

    // single-mode vorticity gives a shear flow whose self-advection vanishes
    const SpectralField e10 = field_from_modes({{{1, 0}, 1.0}}, 4);
    const SpectralField pi = pressure_from_velocity(biot_savart(e10));
    CHECK(l2_norm(pi) <= 1e-14);
    const SpectralField pi_oracle = testing::poisson_pressure(e10, 16);
    CHECK(l2_norm(pi_oracle) <= 1e-14);
}

TEST_CASE("pressure matches the real-basis Poisson oracle on Lambda_2") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SpectralField xi = random_unit(2, 70 + seed);
        const SpectralField pi = pressure_from_velocity(biot_savart(xi));
        const SpectralField oracle = testing::poisson_pressure(xi, 16);
        double worst = 0.0;
        for_each_mode(2, [&](ModeIndex k) {
            worst = std::max(worst, std::abs(pi.slot(k) - oracle.slot(k)));
        });
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("pressure gradient is orthogonal to every divergence-free mode") {
    const SpectralField xi = random_unit(4, 123);
    const SpectralField pi = pressure_from_velocity(biot_savart(xi));
    const auto grad_pi = gradient_modes(to_complex_modes(pi));
    // <grad pi, g_k> is proportional to the k_perp component of grad pi at k
    double worst = 0.0;
    for_each_mode(4, [&](ModeIndex k) {
        const std::complex<double> pairing =
            static_cast<double>(k.perp().k1) * grad_pi[0].at(k) +
            static_cast<double>(k.perp().k2) * grad_pi[1].at(k);
        worst = std::max(worst, std::abs(pairing) / k.norm());
    });
    CHECK(worst <= 1e-10);
}
