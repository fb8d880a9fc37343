#pragma once

// Spatial operators of the vorticity formulation: Biot-Savart velocity
// recovery, spectral differentiation, the dealiased advection term
// B(xi)zeta = Pi_N[(K*xi) . grad zeta], and pressure recovery from the
// Helmholtz decomposition of (u . grad)u.

#include <array>
#include <bit>
#include <cmath>
#include <complex>

#include "sie2d/field.hpp"
#include "sie2d/modes.hpp"
#include "sie2d/transforms.hpp"

namespace sie2d {

namespace detail {

// Clear the lowest `bits` mantissa bits. The magnitude never grows, and the
// result times any integer below 2^bits is exactly representable.
inline double trim_mantissa(double v, int bits) {
    const auto u = std::bit_cast<std::uint64_t>(v) & ~((std::uint64_t{1} << bits) - 1);
    return std::bit_cast<double>(u);
}

}  // namespace detail

// u = K * xi on the exponential basis: u(k) = i xi(k) k_perp / (2 pi |k|^2).
// The per-mode scalar is trimmed so its products with k1, k2 are exact;
// both components then share one rounded value s k1 k2 and the stored field
// satisfies k . u(k) = 0 bitwise. curl(u) returns xi to roundoff.
inline VelocityField biot_savart(const SpectralField& xi) {
    const ComplexModes c = to_complex_modes(xi);
    VelocityField u(xi.N());
    const std::complex<double> imag(0.0, 1.0);
    const int trim_bits = std::bit_width(static_cast<unsigned>(xi.N()));
    for_each_mode(xi.N(), [&](ModeIndex k) {
        const std::complex<double> raw = imag * c.at(k) / (kTwoPi * k.norm_sq());
        const std::complex<double> factor(detail::trim_mantissa(raw.real(), trim_bits),
                                          detail::trim_mantissa(raw.imag(), trim_bits));
        const ModeIndex kp = k.perp();
        u.component(0).at(k) = factor * static_cast<double>(kp.k1);
        u.component(1).at(k) = factor * static_cast<double>(kp.k2);
    });
    return u;
}

// Scalar curl of a velocity field: xi(k) = 2 pi i (k1 u2(k) - k2 u1(k)).
inline SpectralField curl(const VelocityField& u) {
    ComplexModes c(u.N());
    const std::complex<double> two_pi_i(0.0, kTwoPi);
    for_each_mode(u.N(), [&](ModeIndex k) {
        c.at(k) = two_pi_i * (static_cast<double>(k.k1) * u.component(1).at(k) -
                              static_cast<double>(k.k2) * u.component(0).at(k));
    });
    return to_real_field(c);
}

// Spectral partial derivatives: (d_j f)(k) = 2 pi i k_j f(k).
inline std::array<ComplexModes, 2> gradient_modes(const ComplexModes& f) {
    std::array<ComplexModes, 2> g{ComplexModes(f.n), ComplexModes(f.n)};
    const std::complex<double> two_pi_i(0.0, kTwoPi);
    for_each_mode(f.n, [&](ModeIndex k) {
        const std::complex<double> base = two_pi_i * f.at(k);
        g[0].at(k) = static_cast<double>(k.k1) * base;
        g[1].at(k) = static_cast<double>(k.k2) * base;
    });
    return g;
}

// Advection by a frozen velocity field. Holding the velocity samples on the
// padded grid makes repeated applications (fixed-point sweeps, dense
// operator assembly) cost three transforms each.
class AdvectionOperator {
  public:
    explicit AdvectionOperator(const SpectralField& xi_adv)
        : n_(xi_adv.N()), m_(dealias_grid_size(n_)) {
        const VelocityField u = biot_savart(xi_adv);
        u_grid_[0] = synthesize_on_grid(u.component(0), m_);
        u_grid_[1] = synthesize_on_grid(u.component(1), m_);
        velocity_sup_ = 0.0;
        for (std::size_t i = 0; i < u_grid_[0].values.size(); ++i) {
            const double speed_sq = u_grid_[0].values[i] * u_grid_[0].values[i] +
                                    u_grid_[1].values[i] * u_grid_[1].values[i];
            velocity_sup_ = std::max(velocity_sup_, speed_sq);
        }
        velocity_sup_ = std::sqrt(velocity_sup_);
    }

    int N() const { return n_; }
    int grid_size() const { return m_; }

    // Pointwise speed maximum on the padded grid.
    double velocity_sup() const { return velocity_sup_; }

    // Operator-norm bound ||B|| <= 2 pi sqrt(2) N |u|_inf.
    double norm_bound() const { return kTwoPi * std::sqrt(2.0) * n_ * velocity_sup_; }

    // Pi_N [ u . grad zeta ], dealiased exactly on the padded grid.
    SpectralField apply(const SpectralField& zeta) const {
        zeta.require_truncation(n_);
        const auto grad = gradient_modes(to_complex_modes(zeta));
        const GridBuffer gx = synthesize_on_grid(grad[0], m_);
        const GridBuffer gy = synthesize_on_grid(grad[1], m_);
        GridBuffer prod(m_);
        for (std::size_t i = 0; i < prod.values.size(); ++i)
            prod.values[i] = u_grid_[0].values[i] * gx.values[i] + u_grid_[1].values[i] * gy.values[i];
        return grid_to_spectral(prod, n_);
    }

  private:
    int n_;
    int m_;
    std::array<GridBuffer, 2> u_grid_;
    double velocity_sup_ = 0.0;
};

// B(xi_adv) zeta with exact dealiasing; skew-symmetric in zeta.
inline SpectralField transport_term(const SpectralField& xi_adv, const SpectralField& zeta) {
    xi_adv.require_same_truncation(zeta);
    return AdvectionOperator(xi_adv).apply(zeta);
}

// Mean-zero pressure solving Delta pi = -div[(u . grad)u]; equivalently
// grad pi = (P - Id)(u . grad)u with P the Leray projection.
inline SpectralField pressure_from_velocity(const VelocityField& u) {
    const int n = u.N();
    const int m = dealias_grid_size(n);

    const GridBuffer u1 = synthesize_on_grid(u.component(0), m);
    const GridBuffer u2 = synthesize_on_grid(u.component(1), m);
    const auto g1 = gradient_modes(u.component(0));
    const auto g2 = gradient_modes(u.component(1));
    const GridBuffer d1u1 = synthesize_on_grid(g1[0], m);
    const GridBuffer d2u1 = synthesize_on_grid(g1[1], m);
    const GridBuffer d1u2 = synthesize_on_grid(g2[0], m);
    const GridBuffer d2u2 = synthesize_on_grid(g2[1], m);

    GridBuffer f1(m), f2(m);
    for (std::size_t i = 0; i < f1.values.size(); ++i) {
        f1.values[i] = u1.values[i] * d1u1.values[i] + u2.values[i] * d2u1.values[i];
        f2.values[i] = u1.values[i] * d1u2.values[i] + u2.values[i] * d2u2.values[i];
    }

    const ComplexModes fc1 = grid_to_modes(f1, n);
    const ComplexModes fc2 = grid_to_modes(f2, n);

    ComplexModes pc(n);
    const std::complex<double> imag(0.0, 1.0);
    for_each_mode(n, [&](ModeIndex q) {
        const std::complex<double> q_dot_f =
            static_cast<double>(q.k1) * fc1.at(q) + static_cast<double>(q.k2) * fc2.at(q);
        pc.at(q) = imag * q_dot_f / (kTwoPi * q.norm_sq());
    });
    return to_real_field(pc);
}

}  // namespace sie2d
