#pragma once

// Q-Wiener curl noise. The spectrum assigns each mode the amplitude
// sigma_k = 2 pi |k| c_k with the isotropic power law c_k = c0 |k|^{-r},
// so a curl-noise increment over a window of length tau is
//   dW_curl = sum_k sigma_k dbeta_k e_k,   dbeta_k ~ N(0, tau) independent.
//
// Brownian increments are generated once at the finest dyadic resolution;
// every coarser step size sees sums of the same numbers (common random
// numbers). Window sums are formed by halving recursively, so the
// telescoping identity across adjacent dyadic levels is exact bitwise.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sie2d/field.hpp"
#include "sie2d/modes.hpp"
#include "sie2d/operators.hpp"

namespace sie2d {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream key for (master_seed, path_id, mode); distinct inputs map to
// well-separated 64-bit seeds.
inline std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t path_id, ModeIndex k) {
    std::uint64_t s = splitmix64(master_seed);
    s = splitmix64(s ^ (path_id + 0x632be59bd9b4e019ULL));
    const std::uint64_t packed = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.k1)) << 32) |
                                 static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.k2));
    return splitmix64(s ^ packed);
}

// Standard normals from a fully specified Box-Muller pair so that streams
// are reproducible across standard libraries.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();        // [0, 1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = kTwoPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace detail

// Per-mode noise amplitudes sigma_k over Lambda_N.
class NoiseSpectrum {
  public:
    // Spectrum with sigma identically zero (noise-free runs).
    static NoiseSpectrum zero(int n) {
        require_valid_truncation(n);
        NoiseSpectrum s;
        s.n_ = n;
        s.c0_ = 0.0;
        s.r_ = 0.0;
        s.sigma_.assign(static_cast<std::size_t>(2 * n + 1) * (2 * n + 1), 0.0);
        return s;
    }

    int N() const { return n_; }
    double c0() const { return c0_; }
    double decay_exponent() const { return r_; }
    bool is_zero() const { return c0_ == 0.0; }

    // Set when r <= 11/2: the trace condition sum c_k^2 |k|^9 < infinity
    // would fail in the untruncated limit. Usable, but flagged.
    bool summability_warning() const { return warn_; }

    double sigma(ModeIndex k) const {
        if (!k.in_lambda(n_)) return 0.0;
        return sigma_[detail::square_index(n_, k)];
    }

    double sum_sigma_sq() const {
        double s = 0.0;
        for (double v : sigma_) s += v * v;
        return s;
    }

    friend NoiseSpectrum build_spectrum(int n, double c0, double r);

  private:
    int n_ = 0;
    double c0_ = 0.0;
    double r_ = 0.0;
    bool warn_ = false;
    std::vector<double> sigma_;
};

inline NoiseSpectrum build_spectrum(int n, double c0, double r) {
    require_valid_truncation(n);
    if (!(c0 > 0.0)) throw std::invalid_argument("noise amplitude c0 must be positive");
    NoiseSpectrum s;
    s.n_ = n;
    s.c0_ = c0;
    s.r_ = r;
    s.warn_ = r <= 5.5;
    s.sigma_.assign(static_cast<std::size_t>(2 * n + 1) * (2 * n + 1), 0.0);
    for_each_mode(n, [&](ModeIndex k) {
        // sigma_k = 2 pi |k| c0 |k|^{-r} = 2 pi c0 |k|^{1-r}
        s.sigma_[detail::square_index(n, k)] =
            kTwoPi * c0 * std::pow(static_cast<double>(k.norm_sq()), 0.5 * (1.0 - r));
    });
    return s;
}

// Per-mode Brownian increments at the finest resolution, one independent
// substream per (master_seed, path_id, mode).
class BrownianTable {
  public:
    int N() const { return n_; }
    std::uint64_t n_fine() const { return n_fine_; }
    double t_final() const { return t_final_; }
    double dt_fine() const { return dt_; }
    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t path_id() const { return path_id_; }

    const std::vector<ModeIndex>& modes() const { return modes_; }

    const double* increments(std::size_t mode_rank) const { return &inc_[mode_rank * n_fine_]; }

    // Sum of the finest increments over [first, first+len), len a power of
    // two aligned to the dyadic grid. Computed by recursive halving, so a
    // window sum is always the sum of its two half-window sums bitwise.
    double window_sum(std::size_t mode_rank, std::uint64_t first, std::uint64_t len) const {
        return dyadic_sum(increments(mode_rank) + first, len);
    }

    // Same halving order with each finest increment scaled first. Scaling
    // inside the recursion keeps the telescoping identity bitwise even
    // after per-mode amplitudes are applied.
    double scaled_window_sum(std::size_t mode_rank, std::uint64_t first, std::uint64_t len,
                             double scale) const {
        return scaled_dyadic_sum(increments(mode_rank) + first, len, scale);
    }

    friend BrownianTable sample_brownian_table(const NoiseSpectrum& spectrum, std::uint64_t n_fine,
                                               double t_final, std::uint64_t master_seed,
                                               std::uint64_t path_id);

    friend bool operator==(const BrownianTable&, const BrownianTable&) = default;

    // Reassemble a table from stored parts (snapshot reader).
    static BrownianTable from_raw(int n, std::uint64_t n_fine, double t_final,
                                  std::uint64_t master_seed, std::uint64_t path_id,
                                  std::vector<double> increments) {
        require_valid_truncation(n);
        if (n_fine == 0) throw std::invalid_argument("n_fine must be >= 1");
        if (!(t_final > 0.0)) throw std::invalid_argument("final time must be positive");
        BrownianTable t;
        t.n_ = n;
        t.n_fine_ = n_fine;
        t.t_final_ = t_final;
        t.dt_ = t_final / static_cast<double>(n_fine);
        t.master_seed_ = master_seed;
        t.path_id_ = path_id;
        t.modes_ = modes_in_lambda(n);
        if (increments.size() != t.modes_.size() * n_fine)
            throw std::invalid_argument("increment array size does not match Lambda_N x n_fine");
        t.inc_ = std::move(increments);
        return t;
    }

  private:
    static double dyadic_sum(const double* a, std::uint64_t len) {
        if (len == 1) return a[0];
        const std::uint64_t half = len / 2;
        return dyadic_sum(a, half) + dyadic_sum(a + half, half);
    }

    static double scaled_dyadic_sum(const double* a, std::uint64_t len, double scale) {
        if (len == 1) return scale * a[0];
        const std::uint64_t half = len / 2;
        return scaled_dyadic_sum(a, half, scale) + scaled_dyadic_sum(a + half, half, scale);
    }

    int n_ = 0;
    std::uint64_t n_fine_ = 0;
    double t_final_ = 0.0;
    double dt_ = 0.0;
    std::uint64_t master_seed_ = 0;
    std::uint64_t path_id_ = 0;
    std::vector<ModeIndex> modes_;
    std::vector<double> inc_;  // mode-major: inc_[rank * n_fine + t]
};

inline BrownianTable sample_brownian_table(const NoiseSpectrum& spectrum, std::uint64_t n_fine,
                                           double t_final, std::uint64_t master_seed,
                                           std::uint64_t path_id) {
    if (n_fine == 0) throw std::invalid_argument("n_fine must be >= 1");
    if (!(t_final > 0.0)) throw std::invalid_argument("final time must be positive");
    BrownianTable t;
    t.n_ = spectrum.N();
    t.n_fine_ = n_fine;
    t.t_final_ = t_final;
    t.dt_ = t_final / static_cast<double>(n_fine);
    t.master_seed_ = master_seed;
    t.path_id_ = path_id;
    t.modes_ = modes_in_lambda(spectrum.N());
    t.inc_.resize(t.modes_.size() * n_fine);
    const double scale = std::sqrt(t.dt_);
    for (std::size_t rank = 0; rank < t.modes_.size(); ++rank) {
        detail::GaussianStream stream(detail::substream_seed(master_seed, path_id, t.modes_[rank]));
        double* row = &t.inc_[rank * n_fine];
        for (std::uint64_t i = 0; i < n_fine; ++i) row[i] = scale * stream.next();
    }
    return t;
}

namespace detail {
inline void require_window(const BrownianTable& table, int level, std::uint64_t step) {
    if (level < 0 || level >= 64) throw std::invalid_argument("dyadic level out of range");
    const std::uint64_t width = std::uint64_t{1} << level;
    if (width > table.n_fine() || table.n_fine() % width != 0)
        throw std::invalid_argument("level " + std::to_string(level) +
                                    " does not divide the table (n_fine = " + std::to_string(table.n_fine()) + ")");
    if (step >= table.n_fine() / width)
        throw std::invalid_argument("window " + std::to_string(step) + " out of range at level " +
                                    std::to_string(level));
}
}  // namespace detail

// Curl-noise increment over window `step` at dyadic level `level`:
// dW_curl = sum_k sigma_k dbeta_k e_k.
inline SpectralField wcurl_increment(const NoiseSpectrum& spectrum, const BrownianTable& table,
                                     int level, std::uint64_t step) {
    if (spectrum.N() != table.N())
        throw std::invalid_argument("spectrum and table truncations differ");
    detail::require_window(table, level, step);
    const std::uint64_t width = std::uint64_t{1} << level;
    SpectralField out(table.N());
    const auto& modes = table.modes();
    for (std::size_t rank = 0; rank < modes.size(); ++rank) {
        const double s = spectrum.sigma(modes[rank]);
        if (s == 0.0) continue;
        out.slot(modes[rank]) = table.scaled_window_sum(rank, step * width, width, s);
    }
    return out;
}

// Velocity-space increment dW = K * dW_curl; divergence-free by construction.
inline VelocityField w_increment_velocity(const NoiseSpectrum& spectrum, const BrownianTable& table,
                                          int level, std::uint64_t step) {
    return biot_savart(wcurl_increment(spectrum, table, level, step));
}

}  // namespace sie2d
