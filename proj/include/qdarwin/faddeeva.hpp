// faddeeva.hpp: Faddeeva function w(z) = exp(-z^2) erfc(-iz) in the upper half plane
//
// Weideman's rational expansion (SIAM J. Numer. Anal. 31, 1994) with N = 40 terms;
// relative accuracy is about 1e-14 for Im z >= 0. Coefficients are built once from a
// direct DFT of the mapped Gaussian.

#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "qdarwin/common.hpp"

namespace qdarwin::special {

namespace detail {

inline constexpr int kWeidemanTerms = 40;

struct WeidemanTable {
    double L{};
    std::array<double, kWeidemanTerms> a{};  // a[j-1] multiplies Z^(j-1)

    WeidemanTable() {
        constexpr int N = kWeidemanTerms;
        constexpr int M = 2 * N;
        constexpr int M2 = 2 * M;
        L = std::sqrt(N / std::sqrt(2.0));

        // f[0] = 0, f[i] = sample at k = i - M for i = 1 .. 2M-1
        std::array<double, M2> f{};
        for (int i = 1; i < M2; ++i) {
            const int k = i - M;
            const double theta = k * kPi / M;
            const double t = L * std::tan(theta / 2.0);
            f[i] = std::exp(-t * t) * (L * L + t * t);
        }
        // fftshift for even length: shifted[m] = f[(m + M) mod 2M]
        std::array<double, M2> shifted{};
        for (int m = 0; m < M2; ++m) shifted[m] = f[(m + M) % M2];

        for (int j = 1; j <= N; ++j) {
            double re = 0.0;
            for (int m = 0; m < M2; ++m) re += shifted[m] * std::cos(kTwoPi * j * m / M2);
            a[j - 1] = re / M2;
        }
    }
};

inline const WeidemanTable& weideman_table() {
    static const WeidemanTable table;
    return table;
}

}  // namespace detail

/// Faddeeva function for Im z >= 0. Callers map lower-half-plane arguments themselves.
inline cplx faddeeva_upper(cplx z) {
    const auto& tab = detail::weideman_table();
    const cplx iz{-z.imag(), z.real()};
    const cplx denom = tab.L - iz;
    const cplx Z = (tab.L + iz) / denom;
    cplx p{0.0, 0.0};
    for (int j = detail::kWeidemanTerms - 1; j >= 0; --j) p = p * Z + tab.a[j];
    return 2.0 * p / (denom * denom) + (1.0 / std::sqrt(kPi)) / denom;
}

/// Faddeeva function on the whole plane, via w(z) = 2 exp(-z^2) - w(-z) below the axis.
inline cplx faddeeva(cplx z) {
    if (z.imag() >= 0.0) return faddeeva_upper(z);
    return 2.0 * std::exp(-z * z) - faddeeva_upper(-z);
}

}  // namespace qdarwin::special
