#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace cellsim {

namespace detail {

// Weideman's rational approximation of w(z) with N = 36 terms. The
// coefficients are a cosine transform of exp(-t^2)(L^2+t^2) sampled on the
// map t = L tan(theta/2), evaluated once in long double.
template <typename Scalar>
struct WeidemanTable {
    static constexpr int N = 36;
    Scalar L;
    std::array<Scalar, N> a;

    WeidemanTable()
    {
        using LD = long double;
        constexpr int M = 2 * N;
        const LD pi = std::numbers::pi_v<LD>;
        const LD Lw = std::sqrt(static_cast<LD>(N) / std::sqrt(LD(2)));
        std::array<LD, 2 * M> f{};
        for (int k = -M + 1; k <= M - 1; ++k) {
            const LD t = Lw * std::tan(k * pi / (2 * M));
            f[static_cast<std::size_t>(k + M)] = std::exp(-t * t) * (Lw * Lw + t * t);
        }
        for (int n = 1; n <= N; ++n) {
            LD s = 0;
            for (int k = -M + 1; k <= M - 1; ++k)
                s += f[static_cast<std::size_t>(k + M)] * std::cos(pi * k * n / M);
            a[static_cast<std::size_t>(n - 1)] = static_cast<Scalar>(s / (2 * M));
        }
        L = static_cast<Scalar>(Lw);
    }
};

template <typename Scalar>
std::complex<Scalar> faddeeva_upper(std::complex<Scalar> z)
{
    static const WeidemanTable<Scalar> tab;
    const std::complex<Scalar> i(0, 1);
    const std::complex<Scalar> lz = tab.L - i * z;
    const std::complex<Scalar> Z = (tab.L + i * z) / lz;
    std::complex<Scalar> p = tab.a[WeidemanTable<Scalar>::N - 1];
    for (int n = WeidemanTable<Scalar>::N - 2; n >= 0; --n) p = p * Z + tab.a[static_cast<std::size_t>(n)];
    const Scalar rsqpi = Scalar(1) / std::sqrt(std::numbers::pi_v<Scalar>);
    return Scalar(2) * p / (lz * lz) + rsqpi / lz;
}

// Laplace continued fraction, accurate far from the origin in the upper half plane.
template <typename Scalar>
std::complex<Scalar> faddeeva_far(std::complex<Scalar> z)
{
    const std::complex<Scalar> i(0, 1);
    std::complex<Scalar> cf = z;
    for (int k = 40; k >= 1; --k) cf = z - (Scalar(k) / Scalar(2)) / cf;
    return i / (std::sqrt(std::numbers::pi_v<Scalar>) * cf);
}

}  // namespace detail

// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
template <typename Scalar>
std::complex<Scalar> faddeeva(std::complex<Scalar> z)
{
    if (z.imag() < 0) {
        const std::complex<Scalar> mz = -z;
        return Scalar(2) * std::exp(-z * z) - faddeeva(mz);
    }
    if (std::abs(z) > Scalar(12)) return detail::faddeeva_far(z);
    return detail::faddeeva_upper(z);
}

}  // namespace cellsim
