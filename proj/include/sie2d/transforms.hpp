#pragma once

// FFT bridge between spectral coefficients and physical-space samples.
//
// Grids are M x M with samples at x = (a/M, b/M). Synthesis places complex
// coefficients into the FFTW half-spectrum layout and runs an unnormalized
// c2r transform; analysis runs r2c and divides by M^2. With M >= 2N+2 the
// round trip of a Lambda_N field is exact to roundoff, and with M >= 3N+1
// the Lambda_N coefficients of a product of two Lambda_N fields are exact
// (no alias lands inside the truncation).

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "sie2d/field.hpp"
#include "sie2d/modes.hpp"

namespace sie2d {

// Physical-space staging buffer: M x M real samples, values[a*M + b] at x = (a/M, b/M).
struct GridBuffer {
    int m = 0;
    std::vector<double> values;

    GridBuffer() = default;
    explicit GridBuffer(int m_in) : m(m_in), values(static_cast<std::size_t>(m_in) * m_in, 0.0) {}

    double& at(int a, int b) { return values[static_cast<std::size_t>(a) * m + b]; }
    double at(int a, int b) const { return values[static_cast<std::size_t>(a) * m + b]; }
};

// Smallest grid admitting a lossless round trip of a Lambda_N field.
inline int min_grid_size(int n) { return 2 * n + 2; }

// Padded grid for quadratic products: smallest power of two >= 3N+1.
inline int dealias_grid_size(int n) {
    int m = 1;
    while (m < 3 * n + 1) m *= 2;
    return m;
}

namespace detail {

inline std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
}

// Per-size FFTW plans plus aligned scratch. Plans are created with
// FFTW_ESTIMATE so the chosen algorithm depends only on the problem size,
// keeping outputs bit-reproducible across runs and threads.
class FourierWorkspace {
  public:
    explicit FourierWorkspace(int m) : m_(m) {
        real_ = fftw_alloc_real(static_cast<std::size_t>(m) * m);
        half_ = fftw_alloc_complex(static_cast<std::size_t>(m) * (m / 2 + 1));
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_ = fftw_plan_dft_r2c_2d(m, m, real_, half_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_2d(m, m, half_, real_, FFTW_ESTIMATE);
    }
    ~FourierWorkspace() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(real_);
        fftw_free(half_);
    }
    FourierWorkspace(const FourierWorkspace&) = delete;
    FourierWorkspace& operator=(const FourierWorkspace&) = delete;

    int grid_size() const { return m_; }
    double* real_data() { return real_; }
    std::complex<double>* half_data() { return reinterpret_cast<std::complex<double>*>(half_); }
    std::size_t half_count() const { return static_cast<std::size_t>(m_) * (m_ / 2 + 1); }

    void zero_half() {
        auto* h = half_data();
        for (std::size_t i = 0, e = half_count(); i < e; ++i) h[i] = {0.0, 0.0};
    }

    void synthesize() { fftw_execute(inv_); }  // half spectrum -> samples (unnormalized)
    void analyze() { fftw_execute(fwd_); }     // samples -> half spectrum (unnormalized)

  private:
    int m_;
    double* real_;
    fftw_complex* half_;
    fftw_plan fwd_;
    fftw_plan inv_;
};

// Scratch is confined per thread; workers never share buffers or plans.
inline FourierWorkspace& workspace_for(int m) {
    thread_local std::map<int, std::unique_ptr<FourierWorkspace>> cache;
    auto& slot = cache[m];
    if (!slot) slot = std::make_unique<FourierWorkspace>(m);
    return *slot;
}

// Write Lambda_N exponential coefficients into the r2c half-spectrum layout.
// Rows carry m1 (wrapped mod M), columns carry m2 >= 0; entries with m2 < 0
// are implied by Hermitian symmetry.
inline void scatter_modes(const ComplexModes& modes, FourierWorkspace& ws) {
    const int n = modes.n;
    const int m = ws.grid_size();
    const int half_cols = m / 2 + 1;
    ws.zero_half();
    auto* h = ws.half_data();
    for (int k2 = 0; k2 <= n; ++k2) {
        for (int k1 = -n; k1 <= n; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            const int row = (k1 + m) % m;
            h[static_cast<std::size_t>(row) * half_cols + k2] = modes.at({k1, k2});
        }
    }
}

// Read Lambda_N exponential coefficients back from the half spectrum,
// normalizing by M^2 and restoring m2 < 0 entries by conjugation.
inline ComplexModes gather_modes(FourierWorkspace& ws, int n) {
    const int m = ws.grid_size();
    const int half_cols = m / 2 + 1;
    const double scale = 1.0 / (static_cast<double>(m) * m);
    const auto* h = ws.half_data();
    ComplexModes out(n);
    for (int k2 = 0; k2 <= n; ++k2) {
        for (int k1 = -n; k1 <= n; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            const int row = (k1 + m) % m;
            const std::complex<double> c = scale * h[static_cast<std::size_t>(row) * half_cols + k2];
            out.at({k1, k2}) = c;
            out.at({-k1, -k2}) = std::conj(c);
        }
    }
    return out;
}

inline void require_grid_size(int m, int n, const char* what) {
    if (m < min_grid_size(n))
        throw std::invalid_argument(std::string(what) + ": grid size " + std::to_string(m) +
                                    " below minimum " + std::to_string(min_grid_size(n)) +
                                    " for Lambda_" + std::to_string(n));
}

}  // namespace detail

inline GridBuffer synthesize_on_grid(const ComplexModes& modes, int m) {
    detail::require_grid_size(m, modes.n, "synthesize_on_grid");
    auto& ws = detail::workspace_for(m);
    detail::scatter_modes(modes, ws);
    ws.synthesize();
    GridBuffer out(m);
    const double* r = ws.real_data();
    std::copy(r, r + out.values.size(), out.values.begin());
    return out;
}

inline GridBuffer evaluate_on_grid(const SpectralField& xi, int m) {
    return synthesize_on_grid(to_complex_modes(xi), m);
}

inline ComplexModes grid_to_modes(const GridBuffer& grid, int n) {
    require_valid_truncation(n);
    detail::require_grid_size(grid.m, n, "grid_to_modes");
    auto& ws = detail::workspace_for(grid.m);
    std::copy(grid.values.begin(), grid.values.end(), ws.real_data());
    ws.analyze();
    return detail::gather_modes(ws, n);
}

// Project grid samples onto Lambda_N in the real basis. The grid mean
// (zero mode) is discarded: fields are mean-zero by construction.
inline SpectralField grid_to_spectral(const GridBuffer& grid, int n) {
    return to_real_field(grid_to_modes(grid, n));
}

// Quadrature L^p norm at grid resolution M. Exact for p = 2 with M >= 2N+2;
// monitoring-grade for other p.
inline double lp_grid_norm(const SpectralField& xi, double p, int m) {
    if (!(p >= 1.0)) throw std::invalid_argument("L^p norm requires p >= 1");
    detail::require_grid_size(m, xi.N(), "lp_grid_norm");
    const GridBuffer g = evaluate_on_grid(xi, m);
    double s = 0.0;
    for (double v : g.values) s += std::pow(std::abs(v), p);
    s /= static_cast<double>(g.values.size());
    return std::pow(s, 1.0 / p);
}

inline double lp_grid_norm(const SpectralField& xi, double p) {
    return lp_grid_norm(xi, p, dealias_grid_size(xi.N()));
}

}  // namespace sie2d
