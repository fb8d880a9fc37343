#pragma once

// Wave-vector indexing for mean-zero periodic fields on the unit torus.
//
// Scalar fields use the real trigonometric basis
//   e_k(x) = sqrt(2) cos(2 pi k.x)   for k in the positive half-lattice,
//   e_k(x) = sqrt(2) sin(2 pi k.x)   for k in its negation,
// which is orthonormal in L2(T^2). The square truncation Lambda_N keeps
// all k with max(|k1|,|k2|) <= N, k != 0.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace sie2d {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// 17 significant digits: enough to reproduce any double exactly, so text
// outputs can be compared byte for byte.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ModeIndex {
    int k1 = 0;
    int k2 = 0;

    friend constexpr bool operator==(const ModeIndex&, const ModeIndex&) = default;
    // Lexicographic (k1, k2); this is also the snapshot record order.
    friend constexpr auto operator<=>(const ModeIndex&, const ModeIndex&) = default;

    constexpr bool is_zero() const { return k1 == 0 && k2 == 0; }

    // k1 > 0, or k1 == 0 and k2 > 0: the cosine half of the basis.
    constexpr bool in_positive_class() const { return k1 > 0 || (k1 == 0 && k2 > 0); }

    constexpr ModeIndex negated() const { return {-k1, -k2}; }
    constexpr ModeIndex perp() const { return {k2, -k1}; }

    constexpr int norm_sq() const { return k1 * k1 + k2 * k2; }
    double norm() const { return std::sqrt(static_cast<double>(norm_sq())); }

    bool in_lambda(int n) const {
        return !is_zero() && std::abs(k1) <= n && std::abs(k2) <= n;
    }

    std::string str() const {
        return "(" + std::to_string(k1) + "," + std::to_string(k2) + ")";
    }
};

// Number of modes in Lambda_N: (2N+1)^2 - 1.
inline int mode_count(int n) { return (2 * n + 1) * (2 * n + 1) - 1; }

inline void require_valid_truncation(int n) {
    if (n < 1) throw std::invalid_argument("truncation radius must be >= 1, got " + std::to_string(n));
}

// All modes of Lambda_N in lexicographic order.
inline std::vector<ModeIndex> modes_in_lambda(int n) {
    require_valid_truncation(n);
    std::vector<ModeIndex> out;
    out.reserve(static_cast<std::size_t>(mode_count(n)));
    for (int k1 = -n; k1 <= n; ++k1)
        for (int k2 = -n; k2 <= n; ++k2)
            if (k1 != 0 || k2 != 0) out.push_back({k1, k2});
    return out;
}

template <typename Fn>
inline void for_each_mode(int n, Fn&& fn) {
    for (int k1 = -n; k1 <= n; ++k1)
        for (int k2 = -n; k2 <= n; ++k2)
            if (k1 != 0 || k2 != 0) fn(ModeIndex{k1, k2});
}

}  // namespace sie2d
