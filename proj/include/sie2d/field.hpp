#pragma once

// Spectral representations of mean-zero fields on the torus.
//
// SpectralField stores real coefficients on the trigonometric basis {e_k};
// VelocityField stores complex coefficients of a divergence-free vector
// field on the exponential basis exp(2 pi i k.x) with Hermitian symmetry.
// The fixed mapping between the two coefficient conventions is
//   c(k) = (a_k + i a_{-k}) / sqrt(2),  c(-k) = conj(c(k))
// for k in the positive half-lattice, where a_k are real-basis coefficients.

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sie2d/modes.hpp"

namespace sie2d {

namespace detail {
inline std::size_t square_index(int n, ModeIndex k) {
    return static_cast<std::size_t>(k.k1 + n) * (2 * n + 1) + static_cast<std::size_t>(k.k2 + n);
}
}  // namespace detail

// Scalar mean-zero field as real-basis coefficients over Lambda_N.
// Coefficients are stored densely on the (2N+1)x(2N+1) square with the
// zero-mode slot pinned to 0; modes outside Lambda_N read as 0.
class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(int n) : n_((require_valid_truncation(n), n)), a_(side() * side(), 0.0) {}

    int N() const { return n_; }
    int side() const { return 2 * n_ + 1; }

    double coeff(ModeIndex k) const {
        if (!k.in_lambda(n_)) return 0.0;
        return a_[detail::square_index(n_, k)];
    }

    void set_coeff(ModeIndex k, double value) {
        if (k.is_zero()) throw std::invalid_argument("zero mode is excluded (fields are mean-zero)");
        if (!k.in_lambda(n_))
            throw std::invalid_argument("mode " + k.str() + " outside Lambda_" + std::to_string(n_));
        a_[detail::square_index(n_, k)] = value;
    }

    // Unchecked slot access for internal loops; index must lie in Lambda_N.
    double& slot(ModeIndex k) { return a_[detail::square_index(n_, k)]; }
    double slot(ModeIndex k) const { return a_[detail::square_index(n_, k)]; }

    std::span<const double> raw() const { return a_; }
    std::span<double> raw() { return a_; }

    SpectralField& operator+=(const SpectralField& o) {
        require_same_truncation(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        require_same_truncation(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    void require_same_truncation(const SpectralField& o) const { require_truncation(o.n_); }

    void require_truncation(int n) const {
        if (n_ != n)
            throw std::invalid_argument("truncation mismatch: Lambda_" + std::to_string(n_) +
                                        " vs Lambda_" + std::to_string(n));
    }

    friend bool operator==(const SpectralField&, const SpectralField&) = default;

  private:
    int n_ = 0;
    std::vector<double> a_;
};

inline double l2_inner(const SpectralField& a, const SpectralField& b) {
    a.require_same_truncation(b);
    double s = 0.0;
    auto ra = a.raw(), rb = b.raw();
    for (std::size_t i = 0; i < ra.size(); ++i) s += ra[i] * rb[i];
    return s;
}

inline double l2_norm(const SpectralField& a) { return std::sqrt(l2_inner(a, a)); }

// Sobolev norm with the weight (1 + (2 pi |k|)^2)^m on each coefficient.
inline double sobolev_norm(const SpectralField& a, int m) {
    if (m < 0) throw std::invalid_argument("Sobolev order must be >= 0, got " + std::to_string(m));
    double s = 0.0;
    for_each_mode(a.N(), [&](ModeIndex k) {
        const double c = a.slot(k);
        if (c == 0.0) return;
        const double w = 1.0 + kTwoPi * kTwoPi * k.norm_sq();
        double wm = 1.0;
        for (int j = 0; j < m; ++j) wm *= w;
        s += wm * c * c;
    });
    return std::sqrt(s);
}

// Build a field from explicit (mode, coefficient) entries; all other modes zero.
inline SpectralField field_from_modes(const std::vector<std::pair<ModeIndex, double>>& entries, int n) {
    SpectralField f(n);
    for (const auto& [k, v] : entries) f.set_coeff(k, v);
    return f;
}

// Orthogonal projection onto Lambda_{n_prime}: coefficients outside are dropped.
inline SpectralField galerkin_project(const SpectralField& xi, int n_prime) {
    require_valid_truncation(n_prime);
    if (n_prime > xi.N())
        throw std::invalid_argument("projection target Lambda_" + std::to_string(n_prime) +
                                    " exceeds source Lambda_" + std::to_string(xi.N()));
    SpectralField out(n_prime);
    for_each_mode(n_prime, [&](ModeIndex k) { out.slot(k) = xi.slot(k); });
    return out;
}

// Scalar field on the exponential basis: c(m) multiplies exp(2 pi i m.x).
// Hermitian symmetry c(-m) = conj(c(m)) holds for real fields.
struct ComplexModes {
    int n = 0;
    std::vector<std::complex<double>> c;

    explicit ComplexModes(int n_in)
        : n((require_valid_truncation(n_in), n_in)),
          c(static_cast<std::size_t>(2 * n_in + 1) * (2 * n_in + 1), {0.0, 0.0}) {}

    std::complex<double>& at(ModeIndex k) { return c[detail::square_index(n, k)]; }
    const std::complex<double>& at(ModeIndex k) const { return c[detail::square_index(n, k)]; }
};

inline ComplexModes to_complex_modes(const SpectralField& f) {
    ComplexModes out(f.N());
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for_each_mode(f.N(), [&](ModeIndex k) {
        if (!k.in_positive_class()) return;
        const std::complex<double> c(f.slot(k) * inv_sqrt2, f.slot(k.negated()) * inv_sqrt2);
        out.at(k) = c;
        out.at(k.negated()) = std::conj(c);
    });
    return out;
}

inline SpectralField to_real_field(const ComplexModes& m) {
    SpectralField out(m.n);
    constexpr double sqrt2 = 1.41421356237309504880;
    for_each_mode(m.n, [&](ModeIndex k) {
        if (!k.in_positive_class()) return;
        const std::complex<double> c = m.at(k);
        out.slot(k) = sqrt2 * c.real();
        out.slot(k.negated()) = sqrt2 * c.imag();
    });
    return out;
}

// Divergence-free mean-zero vector field in spectral form. Instances are
// produced by biot_savart (and linear combinations thereof), which makes
// k . u(k) = 0 and Hermitian symmetry structural.
class VelocityField {
  public:
    VelocityField() = default;
    explicit VelocityField(int n) : comp_{ComplexModes(n), ComplexModes(n)} {}

    int N() const { return comp_[0].n; }

    const ComplexModes& component(int j) const { return comp_.at(static_cast<std::size_t>(j)); }
    ComplexModes& component(int j) { return comp_.at(static_cast<std::size_t>(j)); }

    std::complex<double> coeff(int j, ModeIndex k) const {
        if (!k.in_lambda(N())) return {0.0, 0.0};
        return comp_.at(static_cast<std::size_t>(j)).at(k);
    }

    VelocityField& operator-=(const VelocityField& o) {
        if (N() != o.N()) throw std::invalid_argument("velocity truncation mismatch");
        for (int j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < comp_[j].c.size(); ++i) comp_[j].c[i] -= o.comp_[j].c[i];
        return *this;
    }
    VelocityField& operator+=(const VelocityField& o) {
        if (N() != o.N()) throw std::invalid_argument("velocity truncation mismatch");
        for (int j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < comp_[j].c.size(); ++i) comp_[j].c[i] += o.comp_[j].c[i];
        return *this;
    }
    friend VelocityField operator-(VelocityField a, const VelocityField& b) { return a -= b; }
    friend VelocityField operator+(VelocityField a, const VelocityField& b) { return a += b; }

  private:
    std::array<ComplexModes, 2> comp_{ComplexModes(1), ComplexModes(1)};
};

inline double l2_norm_sq(const VelocityField& u) {
    double s = 0.0;
    for (int j = 0; j < 2; ++j)
        for (const auto& c : u.component(j).c) s += std::norm(c);
    return s;
}

inline double l2_norm(const VelocityField& u) { return std::sqrt(l2_norm_sq(u)); }

// H^1 norm with the same per-mode weight convention as sobolev_norm.
inline double h1_norm(const VelocityField& u) {
    double s = 0.0;
    for_each_mode(u.N(), [&](ModeIndex k) {
        const double w = 1.0 + kTwoPi * kTwoPi * k.norm_sq();
        s += w * (std::norm(u.component(0).at(k)) + std::norm(u.component(1).at(k)));
    });
    return std::sqrt(s);
}

// Largest |u_j(-k) - conj(u_j(k))|; zero exactly when the field is real.
inline double hermitian_defect(const VelocityField& u) {
    double worst = 0.0;
    for_each_mode(u.N(), [&](ModeIndex k) {
        for (int j = 0; j < 2; ++j)
            worst = std::max(worst,
                             std::abs(u.component(j).at(k.negated()) - std::conj(u.component(j).at(k))));
    });
    return worst;
}

// Largest |k . u(k)| over stored modes; exactly zero for Biot-Savart output.
inline double max_divergence(const VelocityField& u) {
    double worst = 0.0;
    for_each_mode(u.N(), [&](ModeIndex k) {
        const std::complex<double> d =
            static_cast<double>(k.k1) * u.component(0).at(k) + static_cast<double>(k.k2) * u.component(1).at(k);
        worst = std::max(worst, std::abs(d));
    });
    return worst;
}

}  // namespace sie2d
